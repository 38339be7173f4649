#!/usr/bin/env python3
"""Generates the synthetic corpora under data/.

The sentences follow a handful of fixed dependency shapes. Aspect and
non-aspect nouns share identical surface contexts, so on unseen words only
the dependency-pattern features can tell them apart; that is what makes the
lifelong fixture sensitive to the reliable-aspect set.

Output is deterministic: rerunning the script rewrites identical files.
"""

import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"


def conj(x, y, adj, x_aspect, y_aspect):
    """the X and Y are ADJ"""
    return [
        ("the", "DT", 2, "det", False),
        (x, "NN", 6, "nsubj", x_aspect),
        ("and", "CC", 4, "cc", False),
        (y, "NN", 2, "conj", y_aspect),
        ("are", "VBP", 6, "cop", False),
        (adj, "JJ", 0, "root", False),
    ]


def discussed(noun):
    """we discussed NOUN"""
    return [
        ("we", "PRP", 2, "nsubj", False),
        ("discussed", "VBD", 0, "root", False),
        (noun, "NN", 2, "dobj", False),
    ]


def compound(first, second, adj):
    """the FIRST SECOND is ADJ, with FIRST SECOND a two-word aspect"""
    return [
        ("the", "DT", 3, "det", False),
        (first, "NN", 3, "compound", "B"),
        (second, "NN", 5, "nsubj", "I"),
        ("is", "VBZ", 5, "cop", False),
        (adj, "JJ", 0, "root", False),
    ]


def camera_review():
    return [
        ("The", "DT", 2, "det", False),
        ("battery", "NN", 7, "nsubj", True),
        ("of", "IN", 5, "case", False),
        ("this", "DT", 5, "det", False),
        ("camera", "NN", 2, "nmod", True),
        ("is", "VBZ", 7, "cop", False),
        ("great", "JJ", 0, "root", False),
    ]


def label_of(flag):
    if flag == "I":
        return "I-ASP"
    if flag:
        return "B-ASP"
    return "O"


def write(path, sentences, labeled=True, comment=None):
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if comment:
        lines.append("# " + comment)
    for s_idx, sentence in enumerate(sentences):
        if s_idx:
            lines.append("")
        for i, (form, pos, head, dep, flag) in enumerate(sentence, start=1):
            label = label_of(flag) if labeled else "_"
            lines.append(f"{i}\t{form}\t{pos}\t{head}\t{dep}\t{label}")
    path.write_text("\n".join(lines) + "\n")


ADJ = ["great", "good", "bad", "poor", "nice"]

TRAIN_ASPECTS = ["battery", "screen", "lens", "zoom", "flash", "keyboard",
                 "speaker", "memory", "sensor", "menu"]
TRAIN_OTHERS = ["wife", "husband", "friend", "kid", "dog", "neighbor",
                "brother", "sister", "cat", "teacher"]
TOPICS = ["politics", "weather", "movies", "football", "dinner", "music"]


def pairs(rng, pool, n):
    out = []
    for _ in range(n):
        a, b = rng.sample(pool, 2)
        out.append((a, b))
    return out


def training_corpus(rng):
    sentences = [camera_review()]
    for a, b in pairs(rng, TRAIN_ASPECTS, 24):
        sentences.append(conj(a, b, rng.choice(ADJ), True, True))
    for a, b in pairs(rng, TRAIN_OTHERS, 24):
        sentences.append(conj(a, b, rng.choice(ADJ), False, False))
    for topic in TOPICS:
        sentences.append(discussed(topic))
    sentences.append(compound("battery", "life", "great"))
    sentences.append(compound("screen", "resolution", "poor"))
    sentences.append(compound("zoom", "range", "nice"))
    rng.shuffle(sentences)
    return sentences


def lifelong_fixture():
    rng = random.Random(20171009)
    lifelong = ROOT / "lifelong"
    write(lifelong / "train.conll", training_corpus(rng),
          comment="labeled training domain")

    # Past domains: "price" and "design" co-occur with known aspects, so the
    # plain model extracts them in every domain and they become reliable.
    past = {
        "camera": [("price", "battery"), ("design", "lens")],
        "cellphone": [("price", "screen"), ("design", "keyboard")],
        "washer": [("price", "memory"), ("design", "menu")],
    }
    others = [("water", "customer"), ("shoes", "neighbor"), ("husband", "kid")]
    for n, (name, aspect_pairs) in enumerate(past.items(), start=1):
        sentences = []
        for a, b in aspect_pairs:
            sentences.append(conj(a, b, rng.choice(ADJ), True, True))
        for a, b in others:
            sentences.append(conj(a, b, rng.choice(ADJ), False, False))
        sentences.append(discussed(rng.choice(TOPICS)))
        write(lifelong / f"d{n}_{name}.conll", sentences, labeled=False,
              comment=f"past domain {name}")

    # Final domain. "warranty" and "shipping" are gold aspects never seen in
    # training; they are only linked to "price", which is unknown to the
    # training aspects but reliable after the past domains. "design" shows up
    # as a non-aspect, which the dictionary baseline gets wrong.
    final = [
        conj("battery", "screen", "great", True, True),
        conj("price", "warranty", "good", True, True),
        conj("shipping", "price", "bad", True, True),
        conj("kid", "dog", "nice", False, False),
        conj("wife", "friend", "great", False, False),
        discussed("design"),
        discussed("weather"),
        conj("zoom", "flash", "poor", True, True),
    ]
    write(lifelong / "d4_tablet.conll", final, comment="final domain (gold)")


BENCH = {
    "computer": ["keyboard", "screen", "memory", "processor", "fan"],
    "camera": ["lens", "zoom", "flash", "sensor", "battery"],
    "router": ["antenna", "signal", "firmware", "range", "setup"],
    "phone": ["screen", "battery", "camera", "speaker", "case"],
    "speaker": ["bass", "volume", "sound", "cable", "remote"],
    "dvdplayer": ["remote", "tray", "disc", "menu", "display"],
    "mp3player": ["battery", "headphones", "storage", "display", "buttons"],
}
BENCH_OTHERS = ["wife", "husband", "friend", "kid", "dog", "neighbor",
                "brother", "sister", "cat", "teacher", "boss", "uncle"]


def benchmark_fixture():
    rng = random.Random(7)
    bench = ROOT / "benchmark"
    for name, aspects in BENCH.items():
        sentences = []
        for a, b in pairs(rng, aspects, 10):
            sentences.append(conj(a, b, rng.choice(ADJ), True, True))
        for a, b in pairs(rng, BENCH_OTHERS, 10):
            sentences.append(conj(a, b, rng.choice(ADJ), False, False))
        sentences.append(conj("price", rng.choice(aspects), "good", True, True))
        for topic in rng.sample(TOPICS, 3):
            sentences.append(discussed(topic))
        rng.shuffle(sentences)
        write(bench / f"{name}.conll", sentences, comment=f"synthetic {name} reviews")

    shared = ["price", "warranty", "design"]
    for n in range(1, 4):
        sentences = []
        for word in shared:
            anchor = rng.choice(BENCH[rng.choice(list(BENCH))])
            sentences.append(conj(word, anchor, rng.choice(ADJ), True, True))
        for a, b in pairs(rng, BENCH_OTHERS, 3):
            sentences.append(conj(a, b, rng.choice(ADJ), False, False))
        write(bench / "past" / f"past{n}.conll", sentences, labeled=False,
              comment="unlabeled past domain")


def main():
    write(ROOT / "camera_review.conll", [camera_review()],
          comment="The battery of this camera is great")
    lifelong_fixture()
    benchmark_fixture()


if __name__ == "__main__":
    main()
