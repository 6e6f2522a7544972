"""Closed-vocabulary English grammar used to build the desk-scale assets.

Everything here is deterministic given a seed: the lexicon, the sentence
generators, the word-level tokenizer, and the pronounceable non-word
inventory. The C++ tokenizer implements the same encoding rules; the vocab
file written by make_assets.py is the single source of truth for token ids.
"""

import random

# ---------------------------------------------------------------------------
# Lexicon. Nouns carry (singular, plural, class); verbs carry
# (base/plural form, third-singular form, past form).
# ---------------------------------------------------------------------------

NOUNS_PERSON_M = [
    ("boy", "boys"), ("man", "men"), ("king", "kings"), ("father", "fathers"),
    ("uncle", "uncles"), ("brother", "brothers"), ("prince", "princes"),
    ("grandfather", "grandfathers"), ("son", "sons"), ("husband", "husbands"),
]
NOUNS_PERSON_F = [
    ("girl", "girls"), ("woman", "women"), ("queen", "queens"),
    ("mother", "mothers"), ("aunt", "aunts"), ("sister", "sisters"),
    ("princess", "princesses"), ("grandmother", "grandmothers"),
    ("daughter", "daughters"), ("wife", "wives"),
]
NOUNS_PERSON_N = [
    ("farmer", "farmers"), ("teacher", "teachers"), ("doctor", "doctors"),
    ("baker", "bakers"), ("singer", "singers"), ("child", "children"),
    ("friend", "friends"), ("neighbor", "neighbors"), ("guest", "guests"),
    ("worker", "workers"), ("painter", "painters"), ("driver", "drivers"),
]
NOUNS_ANIMAL = [
    ("dog", "dogs"), ("cat", "cats"), ("bird", "birds"), ("horse", "horses"),
    ("cow", "cows"), ("sheep", "sheep"), ("goat", "goats"), ("pig", "pigs"),
    ("duck", "ducks"), ("rabbit", "rabbits"), ("mouse", "mice"),
    ("fox", "foxes"), ("wolf", "wolves"), ("bear", "bears"),
    ("lion", "lions"), ("tiger", "tigers"), ("monkey", "monkeys"),
    ("frog", "frogs"), ("fish", "fish"), ("hen", "hens"), ("owl", "owls"),
    ("deer", "deer"), ("snake", "snakes"), ("turtle", "turtles"),
    ("pony", "ponies"),
]
NOUNS_OBJECT = [
    ("ball", "balls"), ("book", "books"), ("cup", "cups"), ("box", "boxes"),
    ("key", "keys"), ("door", "doors"), ("table", "tables"),
    ("chair", "chairs"), ("bed", "beds"), ("lamp", "lamps"),
    ("plate", "plates"), ("spoon", "spoons"), ("knife", "knives"),
    ("fork", "forks"), ("bottle", "bottles"), ("basket", "baskets"),
    ("hat", "hats"), ("coat", "coats"), ("shoe", "shoes"), ("sock", "socks"),
    ("ring", "rings"), ("coin", "coins"), ("stone", "stones"),
    ("stick", "sticks"), ("rope", "ropes"), ("bag", "bags"),
    ("brush", "brushes"), ("clock", "clocks"), ("mirror", "mirrors"),
    ("candle", "candles"), ("pillow", "pillows"), ("blanket", "blankets"),
    ("drum", "drums"), ("bell", "bells"), ("kite", "kites"),
    ("doll", "dolls"), ("toy", "toys"), ("cart", "carts"),
    ("wheel", "wheels"), ("nail", "nails"), ("hammer", "hammers"),
    ("bucket", "buckets"), ("jar", "jars"), ("pot", "pots"), ("pan", "pans"),
    ("towel", "towels"), ("ladder", "ladders"), ("broom", "brooms"),
    ("nest", "nests"), ("egg", "eggs"), ("letter", "letters"),
    ("picture", "pictures"), ("flower", "flowers"), ("tree", "trees"),
    ("leaf", "leaves"), ("branch", "branches"), ("seed", "seeds"),
]
NOUNS_PLACE = [
    ("garden", "gardens"), ("kitchen", "kitchens"), ("house", "houses"),
    ("barn", "barns"), ("field", "fields"), ("forest", "forests"),
    ("river", "rivers"), ("lake", "lakes"), ("road", "roads"),
    ("market", "markets"), ("village", "villages"), ("school", "schools"),
    ("yard", "yards"), ("park", "parks"), ("hill", "hills"),
    ("cave", "caves"), ("shed", "sheds"), ("attic", "attics"),
    ("cellar", "cellars"), ("bridge", "bridges"), ("room", "rooms"),
    ("corner", "corners"), ("wall", "walls"), ("floor", "floors"),
    ("window", "windows"),
]
NOUNS_FOOD = [
    ("apple", "apples"), ("carrot", "carrots"), ("plum", "plums"),
    ("pear", "pears"), ("melon", "melons"), ("cookie", "cookies"),
    ("pie", "pies"), ("cake", "cakes"), ("loaf", "loaves"),
    ("berry", "berries"),
]

VERBS_INTR = [
    ("run", "runs", "ran"), ("jump", "jumps", "jumped"),
    ("sleep", "sleeps", "slept"), ("swim", "swims", "swam"),
    ("dance", "dances", "danced"), ("laugh", "laughs", "laughed"),
    ("cry", "cries", "cried"), ("wait", "waits", "waited"),
    ("sit", "sits", "sat"), ("stand", "stands", "stood"),
    ("fall", "falls", "fell"), ("walk", "walks", "walked"),
    ("shout", "shouts", "shouted"), ("smile", "smiles", "smiled"),
    ("rest", "rests", "rested"), ("arrive", "arrives", "arrived"),
    ("sing", "sings", "sang"), ("play", "plays", "played"),
    ("hide", "hides", "hid"), ("appear", "appears", "appeared"),
]
VERBS_TR = [
    ("chase", "chases", "chased"), ("see", "sees", "saw"),
    ("like", "likes", "liked"), ("find", "finds", "found"),
    ("hold", "holds", "held"), ("carry", "carries", "carried"),
    ("push", "pushes", "pushed"), ("pull", "pulls", "pulled"),
    ("lift", "lifts", "lifted"), ("wash", "washes", "washed"),
    ("clean", "cleans", "cleaned"), ("watch", "watches", "watched"),
    ("touch", "touches", "touched"), ("kick", "kicks", "kicked"),
    ("throw", "throws", "threw"), ("catch", "catches", "caught"),
    ("bring", "brings", "brought"), ("take", "takes", "took"),
    ("want", "wants", "wanted"), ("need", "needs", "needed"),
    ("love", "loves", "loved"), ("open", "opens", "opened"),
    ("close", "closes", "closed"), ("break", "breaks", "broke"),
    ("fix", "fixes", "fixed"), ("paint", "paints", "painted"),
    ("drop", "drops", "dropped"), ("hit", "hits", "hit"),
    ("follow", "follows", "followed"), ("help", "helps", "helped"),
    ("call", "calls", "called"), ("visit", "visits", "visited"),
    ("greet", "greets", "greeted"), ("feed", "feeds", "fed"),
    ("draw", "draws", "drew"), ("move", "moves", "moved"),
    ("shake", "shakes", "shook"), ("cover", "covers", "covered"),
    ("hurt", "hurts", "hurt"), ("dress", "dresses", "dressed"),
]

ADJECTIVES = [
    "small", "big", "red", "blue", "green", "black", "white", "brown",
    "old", "young", "new", "happy", "sad", "angry", "tired", "hungry",
    "clever", "quiet", "loud", "tall", "short", "long", "round", "heavy",
    "light", "warm", "cold", "clean", "dirty", "soft", "hard", "fast",
    "slow", "kind", "brave", "shy", "calm", "bright", "dark", "sweet",
]
ADVERBS_MANNER = [
    "quickly", "slowly", "quietly", "loudly", "happily", "sadly",
    "carefully", "easily", "gently", "bravely", "calmly", "proudly",
]
PREPS_LOC = [
    "in", "on", "near", "under", "behind", "beside", "above", "below",
    "around", "inside", "outside", "across", "against", "between",
]
DETS_SG = ["the", "a", "this", "that"]
DETS_PL = ["the", "these", "those"]
QUANT_SG = ["each", "every", "one"]
QUANT_PL = ["many", "few", "all", "some", "two", "three", "four", "five",
            "six", "seven", "eight", "nine", "ten"]

FUNCTION_WORDS = [
    "is", "are", "was", "were", "has", "have", "had", "does", "do", "did",
    "will", "can", "must", "may", "not", "and", "or", "but", "because",
    "while", "when", "if", "then", "so", "very", "quite", "too", "also",
    "still", "there", "here", "it", "he", "she", "they", "we", "you", "i",
    "him", "her", "them", "us", "me", "his", "their", "our", "your", "my",
    "its", "himself", "herself", "itself", "themselves", "who", "which",
    "what", "where", "how", "why", "to", "of", "with", "from", "for", "at",
    "by", "into", "over", "up", "down", "out", "off", "yes", "no",
    "yesterday", "today", "often", "always", "never", "again", "soon",
    "well", "together", "alone", "early", "now", "look", "looks", "looked",
    "go", "goes", "went", "come", "comes", "came", "put", "puts", "leave",
    "leaves", "left", "enter", "enters", "entered", "think", "thinks",
    "thought", "know", "knows", "knew", "say", "says", "said", "ask",
    "asks", "asked", "answer", "question", "story", "true", "false",
    "first", "last", "next", "before", "after", "jumped", "lazy", "quick",
    "be", "been", "get", "gets", "got", "make", "makes", "made",
]

PUNCT_CHARS = list(".,?!;:=+-*/()[]{}<>\"'&|%$#@^~`\\_")
DIGIT_CHARS = [str(d) for d in range(10)]

BOS = "<bos>"
SP = "<sp>"


def all_nouns():
    out = []
    for lst, cls in [
        (NOUNS_PERSON_M, "person_m"), (NOUNS_PERSON_F, "person_f"),
        (NOUNS_PERSON_N, "person_n"), (NOUNS_ANIMAL, "animal"),
        (NOUNS_OBJECT, "object"), (NOUNS_PLACE, "place"),
        (NOUNS_FOOD, "food"),
    ]:
        out.extend((sg, pl, cls) for sg, pl in lst)
    return out


def all_surface_words():
    words = []
    for sg, pl, _cls in all_nouns():
        words += [sg, pl]
    for forms in VERBS_INTR + VERBS_TR:
        words += list(forms)
    words += ADJECTIVES + ADVERBS_MANNER + PREPS_LOC
    words += DETS_SG + DETS_PL + QUANT_SG + QUANT_PL + FUNCTION_WORDS
    seen, out = set(), []
    for w in words:
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


N_CHUNKS = 210


def derive_chunks(words, n_chunks=N_CHUNKS):
    """Frequent word substrings (length 2-5), scored by count times saved
    length. The greedy longest-match segmenter uses these plus single
    letters, so every ASCII word segments without byte fallback."""
    counts = {}
    for w in words:
        for ln in range(2, 6):
            for i in range(0, len(w) - ln + 1):
                sub = w[i:i + ln]
                if all(c.isalpha() or c == "'" for c in sub):
                    counts[sub] = counts.get(sub, 0) + 1
    scored = sorted(counts.items(),
                    key=lambda kv: (-(kv[1] * (len(kv[0]) - 1)), kv[0]))
    return [s for s, _ in scored[:n_chunks]]


def build_vocab():
    """Token id layout: <bos>, <sp>, 256 byte tokens, digit and punctuation
    characters, then subword pieces. Every piece has a word-initial variant
    ("_x", used at the start of a word) and a word-internal one ("x")."""
    tokens = [BOS, SP]
    tokens += [f"<0x{b:02X}>" for b in range(256)]
    tokens += DIGIT_CHARS
    tokens += PUNCT_CHARS
    letters = [chr(c) for c in range(ord("a"), ord("z") + 1)] + ["'"]
    pieces = letters + derive_chunks(all_surface_words())
    tokens += ["_" + p for p in pieces]
    tokens += pieces
    return tokens


class Tokenizer:
    """Subword tokenizer with byte fallback.

    Rules (mirrored by the C++ implementation):
      - letters/apostrophes group into a word, lowercased;
      - any other non-space character is a single-character pre-token;
      - a word is segmented by greedy longest match over the piece
        inventory, using "_"-prefixed (word-initial) pieces at position 0
        and plain pieces afterwards;
      - single-character pre-tokens map to their own token if present;
      - anything unmatched is emitted as UTF-8 byte tokens, preceded by
        <sp> when the source had whitespace before the fallback run.
    """

    def __init__(self, tokens):
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.bos_id = self.index[BOS]
        self.sp_id = self.index[SP]
        self.byte0 = self.index["<0x00>"]
        self.max_piece = max((len(t) for t in self.tokens
                              if not t.startswith("<")), default=1)

    def __len__(self):
        return len(self.tokens)

    def _pretokens(self, text):
        out = []  # (pretoken, is_word, preceded_by_space)
        i, n = 0, len(text)
        sp = True
        while i < n:
            c = text[i]
            if c.isspace():
                sp = True
                i += 1
                continue
            if c.isalpha() or c == "'":
                j = i
                while j < n and (text[j].isalpha() or text[j] == "'"):
                    j += 1
                out.append((text[i:j].lower(), True, sp))
                i = j
            else:
                out.append((c, False, sp))
                i += 1
            sp = False
        return out

    def _segment_word(self, word, ids):
        """Greedy longest match; returns False if any position has no
        matching piece (caller falls back to bytes for the whole word)."""
        tmp = []
        pos = 0
        while pos < len(word):
            prefix = "_" if pos == 0 else ""
            match = None
            top = min(self.max_piece, len(word) - pos)
            for ln in range(top, 0, -1):
                tid = self.index.get(prefix + word[pos:pos + ln])
                if tid is not None:
                    match = (tid, ln)
                    break
            if match is None:
                return False
            tmp.append(match[0])
            pos += match[1]
        ids.extend(tmp)
        return True

    def encode(self, text, add_bos=True):
        ids = [self.bos_id] if add_bos else []
        prev_fallback = False
        for pre, is_word, sp in self._pretokens(text):
            ok = False
            if is_word:
                ok = self._segment_word(pre, ids)
            else:
                tid = self.index.get(pre)
                if tid is not None:
                    ids.append(tid)
                    ok = True
            if ok:
                prev_fallback = False
            else:
                if sp and prev_fallback:
                    ids.append(self.sp_id)
                ids.extend(self.byte0 + b for b in pre.encode("utf-8"))
                prev_fallback = True
        return ids

    def decode(self, ids):
        parts = []
        for tid in ids:
            tok = self.tokens[tid]
            if tid == self.bos_id:
                continue
            if tid == self.sp_id:
                parts.append(" ")
            elif self.byte0 <= tid < self.byte0 + 256:
                parts.append(chr(tid - self.byte0))
            elif tok.startswith("_"):
                if parts and not parts[-1].endswith(" "):
                    parts.append(" ")
                parts.append(tok[1:])
            elif len(tok) == 1 and not tok.isalpha() and tok != "'":
                if parts and not parts[-1].endswith(" "):
                    parts.append(" ")
                parts.append(tok)
            else:
                parts.append(tok)
        return "".join(parts)


# ---------------------------------------------------------------------------
# Non-word inventory (pronounceable, guaranteed out-of-vocabulary).
# ---------------------------------------------------------------------------

ONSETS = ["b", "bl", "br", "cl", "cr", "d", "dr", "f", "fl", "fr", "g", "gl",
          "gr", "h", "j", "k", "l", "m", "n", "p", "pl", "pr", "r", "s",
          "sk", "sl", "sm", "sn", "sp", "st", "t", "tr", "v", "w", "z",
          "th", "sh", "ch"]
NUCLEI = ["a", "e", "i", "o", "u", "ai", "ea", "oo", "ou"]
CODAS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "x",
         "nt", "nk", "st", "mp", "rk", ""]


def make_nonwords(count, seed, vocab_words):
    rng = random.Random(seed)
    out, seen = [], set()
    while len(out) < count:
        syll = rng.choice([1, 1, 2])
        w = ""
        for _ in range(syll):
            w += rng.choice(ONSETS) + rng.choice(NUCLEI) + rng.choice(CODAS)
        if 3 <= len(w) <= 9 and w not in vocab_words and w not in seen:
            seen.add(w)
            out.append(w)
    return out


# ---------------------------------------------------------------------------
# Sentence generators. Every sentence is grammatical under the rules the
# minimal-pair benchmark later probes (agreement, anaphora, word order,
# tense adverbs).
# ---------------------------------------------------------------------------

class Grammar:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.nouns = all_nouns()
        self.animate = [n for n in self.nouns
                        if n[2] in ("person_m", "person_f", "person_n",
                                    "animal")]
        self.persons = [n for n in self.nouns
                        if n[2] in ("person_m", "person_f", "person_n")]
        self.inanimate = [n for n in self.nouns
                          if n[2] in ("object", "food")]
        self.places = [n for n in self.nouns if n[2] == "place"]

    def noun_phrase(self, pool, plural, n_adj=None, quant_ok=True):
        rng = self.rng
        sg, pl, _cls = rng.choice(pool)
        noun = pl if plural else sg
        if n_adj is None:
            n_adj = rng.choice([0, 0, 0, 1, 1, 2])
        adjs = rng.sample(ADJECTIVES, n_adj)
        if plural:
            det = rng.choice(DETS_PL + (QUANT_PL if quant_ok else []))
        else:
            det = rng.choice(DETS_SG + (QUANT_SG if quant_ok else []))
            if det == "a" and adjs and adjs[0][0] in "aeiou":
                det = "the"  # sidestep a/an
            if det == "a" and not adjs and noun[0] in "aeiou":
                det = "the"
        return [det] + adjs + [noun], noun

    def pp(self, plural=None):
        rng = self.rng
        if plural is None:
            plural = rng.random() < 0.5
        prep = rng.choice(PREPS_LOC)
        np, _ = self.noun_phrase(self.places + self.inanimate, plural,
                                 n_adj=rng.choice([0, 0, 1]), quant_ok=False)
        return [prep] + np

    def verb(self, forms, plural, tense):
        base, s3, past = forms
        if tense == "past":
            return past
        return base if plural else s3

    def clause(self, tense=None, want_len=None):
        """One grammatical clause as a list of words (no punctuation)."""
        rng = self.rng
        if tense is None:
            tense = rng.choice(["pres", "pres", "past"])
        kind = rng.choice(["intr", "intr", "tr", "tr", "tr_pp", "intr_pp",
                           "cop", "refl", "rc", "exist", "subj_pp",
                           "subj_pp"])
        plural = rng.random() < 0.5
        if kind == "intr":
            np, _ = self.noun_phrase(self.animate, plural)
            words = np + [self.verb(rng.choice(VERBS_INTR), plural, tense)]
            if rng.random() < 0.5:
                words.append(rng.choice(ADVERBS_MANNER))
        elif kind == "tr":
            np, _ = self.noun_phrase(self.animate, plural)
            obj, _ = self.noun_phrase(self.inanimate + self.animate,
                                      rng.random() < 0.5)
            words = np + [self.verb(rng.choice(VERBS_TR), plural, tense)] + obj
        elif kind == "tr_pp":
            np, _ = self.noun_phrase(self.animate, plural)
            obj, _ = self.noun_phrase(self.inanimate, rng.random() < 0.5)
            words = (np + [self.verb(rng.choice(VERBS_TR), plural, tense)]
                     + obj + self.pp())
        elif kind == "intr_pp":
            np, _ = self.noun_phrase(self.animate, plural)
            words = (np + [self.verb(rng.choice(VERBS_INTR), plural, tense)]
                     + self.pp())
        elif kind == "cop":
            np, _ = self.noun_phrase(self.animate + self.inanimate, plural)
            if tense == "past":
                cop = "were" if plural else "was"
            else:
                cop = "are" if plural else "is"
            words = np + [cop]
            if rng.random() < 0.3:
                words.append("very")
            words.append(rng.choice(ADJECTIVES))
        elif kind == "refl":
            pool = NOUNS_PERSON_M if rng.random() < 0.5 else NOUNS_PERSON_F
            refl_sg = "himself" if pool is NOUNS_PERSON_M else "herself"
            sg, pl = rng.choice(pool)
            noun = pl if plural else sg
            det = rng.choice(["the", "the"] + (DETS_PL if plural else DETS_SG))
            if det in ("a", "this", "that") and plural:
                det = "the"
            refl = "themselves" if plural else refl_sg
            verb = rng.choice([("hurt", "hurts", "hurt"),
                               ("wash", "washes", "washed"),
                               ("dress", "dresses", "dressed"),
                               ("watch", "watches", "watched")])
            words = [det, noun, self.verb(verb, plural, tense), refl]
            if rng.random() < 0.5:
                words.append(rng.choice(ADVERBS_MANNER))
        elif kind == "rc":
            # head noun + object relative clause; main verb agrees with head
            head_pl = plural
            emb_pl = rng.random() < 0.5
            head, _ = self.noun_phrase(self.animate, head_pl, n_adj=0)
            emb, _ = self.noun_phrase(self.animate, emb_pl, n_adj=0,
                                      quant_ok=False)
            v_emb = self.verb(rng.choice(VERBS_TR), emb_pl, tense)
            v_main = self.verb(rng.choice(VERBS_INTR), head_pl, tense)
            words = head + ["that"] + emb + [v_emb, v_main]
            if rng.random() < 0.5:
                words.append(rng.choice(ADVERBS_MANNER))
        elif kind == "subj_pp":
            # pre-verbal PP between subject and verb, attractor number free
            np, _ = self.noun_phrase(self.animate, plural, n_adj=0)
            words = np + self.pp()
            if rng.random() < 0.5:
                words.append(self.verb(rng.choice(VERBS_INTR), plural, tense))
                if rng.random() < 0.4:
                    words.append(rng.choice(ADVERBS_MANNER))
            else:
                if tense == "past":
                    cop = "were" if plural else "was"
                else:
                    cop = "are" if plural else "is"
                words += [cop, rng.choice(ADJECTIVES)]
        else:  # exist
            if tense == "past":
                cop = "were" if plural else "was"
            else:
                cop = "are" if plural else "is"
            np, _ = self.noun_phrase(self.animate + self.inanimate, plural,
                                     quant_ok=plural)
            if not plural:
                np[0] = "a" if np[-1][0] not in "aeiou" else "the"
            words = ["there", cop] + np + self.pp()
        return words, tense

    def sentence(self, exact_words=None):
        """A full sentence ending in '.'; optionally forced to an exact
        word count (punctuation excluded)."""
        rng = self.rng
        for _ in range(200):
            words, tense = self.clause()
            # optional tense adverb prefix, consistent with clause tense
            r = rng.random()
            if r < 0.18 and tense == "past":
                words = ["yesterday"] + words
            elif r < 0.30 and tense == "pres":
                words = [rng.choice(["today", "often", "always"])] + words
            if rng.random() < 0.18:
                more, _ = self.clause(tense=tense)
                words = words + ["and"] + more
            if exact_words is None or len(words) == exact_words:
                return " ".join(words) + " ."
        # fall back: pad with a PP until the count matches
        while True:
            words, _ = self.clause()
            while len(words) < exact_words:
                words += self.pp()
            if len(words) == exact_words:
                return " ".join(words) + " ."


def jabberwocky(sentence, nonwords, rng):
    """Replace content words with non-words, keep function words/punct."""
    content = set()
    for sg, pl, _ in all_nouns():
        content.update((sg, pl))
    for forms in VERBS_INTR + VERBS_TR:
        content.update(forms)
    content.update(ADJECTIVES)
    content.update(ADVERBS_MANNER)
    out = []
    for w in sentence.split():
        out.append(rng.choice(nonwords) if w in content else w)
    return " ".join(out)


def scramble(sentence, rng):
    words = [w for w in sentence.split() if w != "."]
    rng.shuffle(words)
    return " ".join(words) + " ."
