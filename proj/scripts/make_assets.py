"""Generate the desk-scale data assets: localizer stimuli, profile
conditions, minimal-pair and ToMi-style benchmarks, ToM localizer stories,
and the tokenizer vocab. Deterministic; see README for the seed layout.
"""

import json
import os
import random
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import desk_grammar as dg

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")
ASSETS = os.path.join(ROOT, "assets")

LOCALIZER_SEED = 101
PROFILE_SEED = 202
BENCH_SEED = 303
TOMI_SEED = 404
NONWORD_SEED = 505


def write_lines(path, lines):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        for ln in lines:
            f.write(ln + "\n")


def write_jsonl(path, records):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        for r in records:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def unique_sentences(grammar, count, exact_words, taken=None):
    out, seen = [], set(taken or ())
    while len(out) < count:
        s = grammar.sentence(exact_words=exact_words)
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# Localizer stimuli: 240 12-word sentences vs 240 lists of 12 non-words.
# ---------------------------------------------------------------------------

def make_localizer(vocab_words):
    g = dg.Grammar(LOCALIZER_SEED)
    sentences = unique_sentences(g, 240, 12)
    nonwords = dg.make_nonwords(600, NONWORD_SEED, vocab_words)
    rng = random.Random(LOCALIZER_SEED + 1)
    nw_lines = []
    for _ in range(240):
        nw_lines.append(" ".join(rng.choice(nonwords) for _ in range(12)))
    write_lines(os.path.join(ASSETS, "localizer", "sentences.txt"), sentences)
    write_lines(os.path.join(ASSETS, "localizer", "nonwords.txt"), nw_lines)
    return set(sentences)


# ---------------------------------------------------------------------------
# Profile conditions: held-out S / W / J / N plus non-linguistic controls.
# ---------------------------------------------------------------------------

def make_profile(vocab_words, localizer_sentences, tok):
    g = dg.Grammar(PROFILE_SEED)
    rng = random.Random(PROFILE_SEED + 1)
    nonwords = dg.make_nonwords(600, NONWORD_SEED + 1, vocab_words)

    S = unique_sentences(g, 240, 12, taken=localizer_sentences)
    W = [dg.scramble(s, rng) for s in unique_sentences(g, 240, 12,
                                                       taken=set(S))]
    J_src = unique_sentences(g, 240, 12, taken=set(S))
    J = [dg.jabberwocky(s, nonwords, rng) for s in J_src]
    N = [dg.scramble(j, rng) for j in J]

    arithmetic = []
    for _ in range(240):
        parts = []
        while True:
            a, b = rng.randint(1, 999), rng.randint(1, 999)
            op = rng.choice(["+", "-"])
            res = a + b if op == "+" else a - b
            parts.append(f"{a} {op} {b} = {res}")
            line = " ; ".join(parts)
            if len(tok.encode(line, add_bos=False)) >= 12:
                arithmetic.append(line)
                break

    code = []
    snippets = [
        "int {v} = {a} ; {v} = {v} + {b} ;",
        "for ( {v} = 0 ; {v} < {a} ; {v} = {v} + 1 ) {{ {w} = {w} + {b} ; }}",
        "if ( {v} > {a} ) {{ {w} = {v} * {b} ; }} else {{ {w} = 0 ; }}",
        "while ( {v} != {a} ) {{ {v} = {v} - {b} ; }}",
        "float {v} = {a} / {b} ; return {v} ;",
    ]
    vars_ = ["x", "y", "z", "n", "m", "k", "idx", "tmp", "acc", "val"]
    for _ in range(240):
        while True:
            s = rng.choice(snippets).format(
                v=rng.choice(vars_), w=rng.choice(vars_),
                a=rng.randint(0, 99), b=rng.randint(1, 9))
            if len(tok.encode(s, add_bos=False)) >= 12:
                code.append(s)
                break

    charset = "abcdefghijklmnopqrstuvwxyz0123456789#@%&*+-=<>/"
    random_chars = []
    for _ in range(240):
        while True:
            s = " ".join("".join(rng.choice(charset)
                                 for _ in range(rng.randint(2, 5)))
                         for _ in range(6))
            if len(tok.encode(s, add_bos=False)) >= 12:
                random_chars.append(s)
                break

    base = os.path.join(ASSETS, "profile")
    write_lines(os.path.join(base, "S.txt"), S)
    write_lines(os.path.join(base, "W.txt"), W)
    write_lines(os.path.join(base, "J.txt"), J)
    write_lines(os.path.join(base, "N.txt"), N)
    write_lines(os.path.join(base, "arithmetic.txt"), arithmetic)
    write_lines(os.path.join(base, "code.txt"), code)
    write_lines(os.path.join(base, "random_chars.txt"), random_chars)


# ---------------------------------------------------------------------------
# Minimal-pair benchmark: 10 subtasks x 100 pairs, zero-shot.
# ---------------------------------------------------------------------------

def make_minimal_pairs():
    rng = random.Random(BENCH_SEED)
    g = dg.Grammar(BENCH_SEED + 1)
    animate = g.animate
    inanimate = g.inanimate

    def np_parts(pool, plural, det="the"):
        sg, pl, _ = rng.choice(pool)
        return det, (pl if plural else sg)

    def pair_record(subtask, good, bad):
        c = [good, bad]
        idx = 0
        if rng.random() < 0.5:
            c = [bad, good]
            idx = 1
        return {"context": "", "candidates": c, "correct_index": idx,
                "tags": {"subtask": subtask}}

    records = []
    seen = set()

    def add(subtask, maker, count=100):
        n = 0
        while n < count:
            good, bad = maker()
            if (good, bad) in seen or good == bad:
                continue
            seen.add((good, bad))
            records.append(pair_record(subtask, good, bad))
            n += 1

    def sv_agr_simple():
        plural = rng.random() < 0.5
        det, noun = np_parts(animate, plural)
        base, s3, _ = rng.choice(dg.VERBS_INTR)
        adv = rng.choice(dg.ADVERBS_MANNER)
        vg, vb = (base, s3) if plural else (s3, base)
        return (f"{det} {noun} {vg} {adv} .", f"{det} {noun} {vb} {adv} .")

    def sv_agr_pp():
        plural = rng.random() < 0.5
        det, noun = np_parts(animate, plural)
        _, attractor = np_parts(animate + inanimate, not plural)
        prep = rng.choice(dg.PREPS_LOC)
        base, s3, _ = rng.choice(dg.VERBS_INTR)
        vg, vb = (base, s3) if plural else (s3, base)
        frame = f"{det} {noun} {prep} the {attractor}"
        return (f"{frame} {vg} .", f"{frame} {vb} .")

    def sv_agr_rc():
        head_pl = rng.random() < 0.5
        det, head = np_parts(animate, head_pl)
        _, emb = np_parts(animate, not head_pl)
        tbase, ts3, _ = rng.choice(dg.VERBS_TR)
        v_emb = tbase if not head_pl else ts3  # embedded agrees w/ attractor
        base, s3, _ = rng.choice(dg.VERBS_INTR)
        vg, vb = (base, s3) if head_pl else (s3, base)
        frame = f"{det} {head} that the {emb} {v_emb}"
        return (f"{frame} {vg} .", f"{frame} {vb} .")

    def det_n_agr_demo():
        plural = rng.random() < 0.5
        det = rng.choice(["these", "those"] if plural else ["this", "that"])
        sg, pl, _ = rng.choice(animate + inanimate)
        good_n, bad_n = (pl, sg) if plural else (sg, pl)
        if good_n == bad_n:
            return ("x", "x")
        subj_det, subj = np_parts(animate, False)
        _, s3, _ = rng.choice(dg.VERBS_TR)
        frame = f"{subj_det} {subj} {s3}"
        return (f"{frame} {det} {good_n} .", f"{frame} {det} {bad_n} .")

    def det_n_agr_quant():
        plural = rng.random() < 0.5
        det = rng.choice(dg.QUANT_PL[:4] if plural else dg.QUANT_SG[:2])
        sg, pl, _ = rng.choice(animate)
        good_n, bad_n = (pl, sg) if plural else (sg, pl)
        if good_n == bad_n:
            return ("x", "x")
        base, s3, _ = rng.choice(dg.VERBS_INTR)
        v = base if plural else s3
        adv = rng.choice(dg.ADVERBS_MANNER)
        return (f"{det} {good_n} {v} {adv} .", f"{det} {bad_n} {v} {adv} .")

    REFL_VERBS = [("washed",), ("dressed",), ("watched",), ("hurt",)]

    def anaphor_gender():
        male = rng.random() < 0.5
        pool = dg.NOUNS_PERSON_M if male else dg.NOUNS_PERSON_F
        sg, _ = rng.choice(pool)
        v = rng.choice(REFL_VERBS)[0]
        adv = rng.choice(dg.ADVERBS_MANNER)
        good, bad = ("himself", "herself") if male else ("herself", "himself")
        return (f"the {sg} {v} {good} {adv} .",
                f"the {sg} {v} {bad} {adv} .")

    def anaphor_number():
        plural = rng.random() < 0.5
        male = rng.random() < 0.5
        pool = dg.NOUNS_PERSON_M if male else dg.NOUNS_PERSON_F
        sg, pl = rng.choice(pool)
        noun = pl if plural else sg
        v = rng.choice(REFL_VERBS)[0]
        adv = rng.choice(dg.ADVERBS_MANNER)
        sg_refl = "himself" if male else "herself"
        good, bad = ("themselves", sg_refl) if plural else (sg_refl,
                                                            "themselves")
        return (f"the {noun} {v} {good} {adv} .",
                f"the {noun} {v} {bad} {adv} .")

    def aux_agr():
        plural = rng.random() < 0.5
        past = rng.random() < 0.5
        det, noun = np_parts(animate + inanimate, plural)
        adj = rng.choice(dg.ADJECTIVES)
        if past:
            good, bad = ("were", "was") if plural else ("was", "were")
        else:
            good, bad = ("are", "is") if plural else ("is", "are")
        return (f"{det} {noun} {good} {adj} .", f"{det} {noun} {bad} {adj} .")

    def adj_order():
        plural = rng.random() < 0.5
        det, noun = np_parts(animate, plural)
        adj = rng.choice(dg.ADJECTIVES)
        base, s3, _ = rng.choice(dg.VERBS_INTR)
        v = base if plural else s3
        return (f"{det} {adj} {noun} {v} .", f"{det} {noun} {adj} {v} .")

    def tense_adverb():
        plural = rng.random() < 0.5
        past = rng.random() < 0.5
        det, noun = np_parts(animate, plural)
        base, s3, pastv = rng.choice(dg.VERBS_INTR)
        pres = base if plural else s3
        if past:
            adv, good, bad = "yesterday", pastv, pres
        else:
            adv = rng.choice(["today", "often", "always"])
            good, bad = pres, pastv
        if good == bad:
            return ("x", "x")
        return (f"{adv} {det} {noun} {good} .", f"{adv} {det} {noun} {bad} .")

    add("sv_agr_simple", sv_agr_simple)
    add("sv_agr_pp", sv_agr_pp)
    add("sv_agr_rc", sv_agr_rc)
    add("det_n_agr_demo", det_n_agr_demo)
    add("det_n_agr_quant", det_n_agr_quant)
    add("anaphor_gender", anaphor_gender)
    add("anaphor_number", anaphor_number)
    add("aux_agr", aux_agr)
    add("adj_order", adj_order)
    add("tense_adverb", tense_adverb)

    write_jsonl(os.path.join(ASSETS, "benchmarks", "minimal_pairs.jsonl"),
                records)


# ---------------------------------------------------------------------------
# ToMi-style benchmark: 231 false-belief + 389 true-belief items.
# ---------------------------------------------------------------------------

TOMI_INSTRUCTION = ("the following multiple choice question is based on the "
                    "following story . read the story and then answer the "
                    "question .")


def make_tomi():
    rng = random.Random(TOMI_SEED)
    persons = [sg for sg, _pl in dg.NOUNS_PERSON_M + dg.NOUNS_PERSON_F]
    containers = ["box", "basket", "bag", "bucket", "jar", "pot"]
    objects = ["ball", "ring", "coin", "key", "apple", "book"]
    rooms = ["kitchen", "garden", "barn", "attic", "cellar", "shed"]

    def story(false_belief):
        a, b = rng.sample(persons, 2)
        obj = rng.choice(objects)
        c1, c2 = rng.sample(containers, 2)
        room = rng.choice(rooms)
        lines = [
            f"the {a} and the {b} are in the {room} .",
            f"the {a} puts the {obj} in the {c1} .",
        ]
        if false_belief:
            lines.append(f"the {a} leaves the {room} .")
            lines.append(f"the {b} moves the {obj} to the {c2} .")
            answer = c1  # the absent agent still believes the original spot
        else:
            lines.append(f"the {b} moves the {obj} to the {c2} .")
            lines.append(f"the {a} watches the {b} .")
            answer = c2
        question = f"where will the {a} look for the {obj} ?"
        return " ".join(lines), question, c1, c2, answer

    records = []
    for i in range(620):
        fb = i < 231
        s, q, c1, c2, ans = story(fb)
        cands = [f"in the {c1}", f"in the {c2}"]
        idx = cands.index(f"in the {ans}")
        records.append({
            "context": f"{TOMI_INSTRUCTION}\n{s}\n{q}\n",
            "candidates": cands,
            "correct_index": idx,
            "tags": {"subtask": "tomi",
                     "belief_type": "false_belief" if fb else "true_belief"},
        })
    rng.shuffle(records)
    write_jsonl(os.path.join(ASSETS, "benchmarks", "tomi.jsonl"), records)


# ---------------------------------------------------------------------------
# ToM localizer stories (structured records, 10 per condition).
# ---------------------------------------------------------------------------

FALSE_BELIEF_STORIES = [
    ("the girl puts her ring in the box and leaves the room . her brother "
     "moves the ring to the bag while she is outside .",
     "the girl thinks the ring is in the box .", "true"),
    ("the farmer sees his sheep in the field and walks to the market . "
     "while he is at the market the sheep move into the barn .",
     "the farmer thinks the sheep are in the field .", "true"),
    ("the boy hides a coin under his pillow and goes outside . his sister "
     "finds the coin and puts it in a jar .",
     "the boy thinks the coin is in the jar .", "false"),
    ("the teacher leaves her book on the table and leaves the school . "
     "a student carries the book to the attic .",
     "the teacher thinks the book is on the table .", "true"),
    ("the woman plants a seed near the wall and visits her aunt . while "
     "she is away the wind carries the seed across the garden .",
     "the woman thinks the seed is near the wall .", "true"),
    ("the king puts his crown in the cellar and rides to the bridge . "
     "the queen moves the crown to the attic before he comes back .",
     "the king thinks the crown is in the attic .", "false"),
    ("the baker puts the loaf on the window and walks to the river . "
     "a bird takes the loaf to its nest while he is away .",
     "the baker thinks the loaf is on the window .", "true"),
    ("the child leaves a kite in the yard and goes to school . the "
     "mother brings the kite inside the house .",
     "the child thinks the kite is in the yard .", "true"),
    ("the man hangs his coat behind the door and leaves the house . his "
     "wife moves the coat to the bed .",
     "the man thinks the coat is behind the door .", "true"),
    ("the nurse puts the key in her bag and enters the garden . the "
     "doctor takes the key from the bag while she is outside .",
     "the nurse thinks the key is in her bag .", "true"),
]

FALSE_PHOTO_STORIES = [
    ("a picture shows the old barn painted red . the barn was painted "
     "white last summer .",
     "in the picture the barn is red .", "true"),
    ("the map marks a bridge across the river . the bridge fell two "
     "years ago and was never fixed .",
     "the map shows a bridge across the river .", "true"),
    ("a drawing shows three apples in the basket . the apples were eaten "
     "this morning .",
     "in the drawing the basket is empty .", "false"),
    ("the photo shows the garden full of flowers . the flowers dried "
     "long ago in the cold .",
     "in the photo the garden is full of flowers .", "true"),
    ("the sign lists the market open every morning . the market moved "
     "to the village square last spring .",
     "the sign says the market is open every morning .", "true"),
    ("a painting shows the king with a long black beard . the king "
     "shaved his beard many years ago .",
     "in the painting the king has a beard .", "true"),
    ("the chart marks the lake east of the forest . the lake dried and "
     "is now a green field .",
     "the chart shows a lake east of the forest .", "true"),
    ("a photo shows the tall tree beside the school . the tree fell in "
     "a storm last winter .",
     "in the photo the tree stands beside the school .", "true"),
    ("the poster shows the circus in the park this week . the circus "
     "left the town many days ago .",
     "the poster shows the circus in the park .", "true"),
    ("an old letter says the cellar holds ten jars of plums . the jars "
     "broke when the shelf fell .",
     "the letter says the cellar holds ten jars .", "true"),
]


def make_tom_localizer():
    def rec(story, question, answer):
        return {"story": story, "question": question,
                "choices": ["true", "false"], "answer": answer}

    write_jsonl(os.path.join(ASSETS, "tom", "false_belief.jsonl"),
                [rec(*s) for s in FALSE_BELIEF_STORIES])
    write_jsonl(os.path.join(ASSETS, "tom", "false_photo.jsonl"),
                [rec(*s) for s in FALSE_PHOTO_STORIES])


def main():
    tokens = dg.build_vocab()
    tok = dg.Tokenizer(tokens)
    vocab_words = set(tokens)
    os.makedirs(os.path.join(ASSETS, "desk-model"), exist_ok=True)
    with open(os.path.join(ASSETS, "desk-model", "vocab.json"), "w") as f:
        json.dump({"format": "unitloc-vocab/v1", "tokens": tokens}, f,
                  indent=0)
        f.write("\n")
    loc = make_localizer(vocab_words)
    make_profile(vocab_words, loc, tok)
    make_minimal_pairs()
    make_tomi()
    make_tom_localizer()
    print("vocab size:", len(tokens))
    print("assets written to", os.path.abspath(ASSETS))


if __name__ == "__main__":
    main()
