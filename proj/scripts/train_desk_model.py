"""Train the bundled desk-scale causal LM and export it to the binary
format consumed by the C++ engine (see README, "Model format").

The model is a standard pre-norm transformer decoder: learned positional
embeddings, multi-head causal attention, exact-GELU MLP, LayerNorm eps
1e-5, weight-tied LM head. Training data comes from the closed-vocabulary
grammar in desk_grammar.py. One run on a single CPU core takes roughly an
hour; the exported weights are committed under assets/desk-model/ so the
toolkit's tests never retrain.

Usage: python3 scripts/train_desk_model.py [--steps N] [--quick]
"""

import argparse
import json
import math
import os
import struct
import sys
import time

import torch
import torch.nn as nn
import torch.nn.functional as F

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import desk_grammar as dg

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")
OUT_DIR = os.path.join(ROOT, "assets", "desk-model")

CORPUS_SEED = 77
TORCH_SEED = 1234

N_LAYERS = 6
N_HEADS = 6
HIDDEN = 192
MLP = 768
MAX_CTX = 128
SEQ_LEN = 64
BATCH = 32


class Block(nn.Module):
    def __init__(self):
        super().__init__()
        self.ln1 = nn.LayerNorm(HIDDEN, eps=1e-5)
        self.wq = nn.Linear(HIDDEN, HIDDEN)
        self.wk = nn.Linear(HIDDEN, HIDDEN)
        self.wv = nn.Linear(HIDDEN, HIDDEN)
        self.wo = nn.Linear(HIDDEN, HIDDEN)
        self.ln2 = nn.LayerNorm(HIDDEN, eps=1e-5)
        self.fc = nn.Linear(HIDDEN, MLP)
        self.proj = nn.Linear(MLP, HIDDEN)

    def forward(self, x):
        b, t, h = x.shape
        hd = HIDDEN // N_HEADS
        y = self.ln1(x)
        q = self.wq(y).view(b, t, N_HEADS, hd).transpose(1, 2)
        k = self.wk(y).view(b, t, N_HEADS, hd).transpose(1, 2)
        v = self.wv(y).view(b, t, N_HEADS, hd).transpose(1, 2)
        att = (q @ k.transpose(-2, -1)) / math.sqrt(hd)
        mask = torch.triu(torch.ones(t, t, dtype=torch.bool), diagonal=1)
        att = att.masked_fill(mask, float("-inf")).softmax(dim=-1)
        y = (att @ v).transpose(1, 2).reshape(b, t, h)
        x = x + self.wo(y)
        x = x + self.proj(F.gelu(self.fc(self.ln2(x))))
        return x


class DeskLM(nn.Module):
    def __init__(self, vocab):
        super().__init__()
        self.tok = nn.Embedding(vocab, HIDDEN)
        self.pos = nn.Embedding(MAX_CTX, HIDDEN)
        self.blocks = nn.ModuleList(Block() for _ in range(N_LAYERS))
        self.lnf = nn.LayerNorm(HIDDEN, eps=1e-5)
        self.apply(self._init)

    @staticmethod
    def _init(m):
        if isinstance(m, (nn.Linear, nn.Embedding)):
            nn.init.normal_(m.weight, std=0.02)
            if isinstance(m, nn.Linear) and m.bias is not None:
                nn.init.zeros_(m.bias)

    def forward(self, ids, ablate=None, collect=False):
        """ablate: optional bool tensor [L, H]; True entries are zeroed in
        that block's output (all positions). collect: also return the
        per-block output hidden states."""
        t = ids.shape[-1]
        x = self.tok(ids) + self.pos(torch.arange(t))
        outs = []
        for li, blk in enumerate(self.blocks):
            x = blk(x)
            if ablate is not None:
                x = x * (~ablate[li]).float()
            if collect:
                outs.append(x)
        logits = self.lnf(x) @ self.tok.weight.T
        return (logits, outs) if collect else logits


def build_corpus(tok, n_sentences, seed):
    g = dg.Grammar(seed)
    rng = g.rng
    # noise slice: pseudoword streams, like junk text in web pretraining
    noise_words = dg.make_nonwords(800, seed + 9, set(dg.all_surface_words()))
    ids = []
    for i in range(n_sentences):
        r = rng.random()
        if r < 0.03:
            a, b = rng.randint(1, 200), rng.randint(1, 200)
            op = rng.choice(["+", "-"])
            res = a + b if op == "+" else a - b
            text = f"what is {a} {op} {b} ? it is {res} ."
        elif r < 0.06:
            text = " ".join(rng.choice(noise_words)
                            for _ in range(rng.randint(6, 14)))
        else:
            text = g.sentence()
        ids.extend(tok.encode(text))
    return torch.tensor(ids, dtype=torch.long)


def batches(data, steps, rng):
    n = data.shape[0] - SEQ_LEN - 1
    for _ in range(steps):
        ix = torch.randint(0, n, (BATCH,), generator=rng)
        x = torch.stack([data[i:i + SEQ_LEN] for i in ix])
        y = torch.stack([data[i + 1:i + 1 + SEQ_LEN] for i in ix])
        yield x, y


def nll_of(model, tok, text, ablate=None):
    ids = torch.tensor(tok.encode(text), dtype=torch.long)
    logits = model(ids.unsqueeze(0), ablate=ablate)[0]
    lp = logits.log_softmax(-1)
    return -lp[torch.arange(len(ids) - 1), ids[1:]].sum().item()


def pair_accuracy(model, tok, pairs, ablate=None):
    correct = 0
    for good, bad in pairs:
        if nll_of(model, tok, good, ablate) <= nll_of(model, tok, bad,
                                                      ablate):
            correct += 1
    return 100.0 * correct / len(pairs)


def load_pairs(limit_per_subtask):
    path = os.path.join(ROOT, "assets", "benchmarks", "minimal_pairs.jsonl")
    by_task = {}
    with open(path) as f:
        for line in f:
            r = json.loads(line)
            t = r["tags"]["subtask"]
            if len(by_task.setdefault(t, [])) < limit_per_subtask:
                good = r["candidates"][r["correct_index"]]
                bad = r["candidates"][1 - r["correct_index"]]
                by_task[t].append((good, bad))
    return by_task


def capture_last_token(model, tok, lines, max_tokens=12):
    """Pooled block-output activations, last-token pooling, [n, L*H]."""
    rows = []
    with torch.no_grad():
        for line in lines:
            ids = tok.encode(line)
            ids = [ids[0]] + ids[1:1 + max_tokens]
            _, outs = model(torch.tensor(ids).unsqueeze(0), collect=True)
            rows.append(torch.cat([o[0, -1] for o in outs]))
    return torch.stack(rows)


def welch_t_cols(a, b):
    ma, mb = a.mean(0), b.mean(0)
    va, vb = a.var(0, unbiased=True), b.var(0, unbiased=True)
    denom = (va / a.shape[0] + vb / b.shape[0]).sqrt()
    t = (ma - mb) / denom
    t[denom == 0] = 0.0
    return t


def ablation_report(model, tok):
    """Localize on the bundled stimuli, ablate top 1% vs random, report
    accuracy on a benchmark slice. Mirrors what the C++ acceptance does."""
    with open(os.path.join(ROOT, "assets", "localizer", "sentences.txt")) as f:
        sents = [l.strip() for l in f]
    with open(os.path.join(ROOT, "assets", "localizer", "nonwords.txt")) as f:
        nons = [l.strip() for l in f]
    model.eval()
    acts_s = capture_last_token(model, tok, sents)
    acts_n = capture_last_token(model, tok, nons)
    t = welch_t_cols(acts_s, acts_n)
    n_units = N_LAYERS * HIDDEN
    k = int(0.01 * n_units)
    top = torch.argsort(-t, stable=True)[:k]

    def mask_of(idxs):
        m = torch.zeros(N_LAYERS, HIDDEN, dtype=torch.bool)
        for u in idxs:
            m[u // HIDDEN, u % HIDDEN] = True
        return m

    by_task = load_pairs(20)  # 20 pairs/subtask keeps the probe quick
    pairs = [p for ps in by_task.values() for p in ps]
    with torch.no_grad():
        base = pair_accuracy(model, tok, pairs)
        print(f"[probe] baseline={base:.1f}")
        for kk in [k, 2 * k, 4 * k]:
            sel = pair_accuracy(model, tok, pairs,
                                ablate=mask_of(top[:k] if kk == k
                                               else torch.argsort(
                                                   -t, stable=True)[:kk]))
            rnd_accs = []
            for seed in range(3):
                rs = torch.Generator().manual_seed(seed)
                topset = set(torch.argsort(-t, stable=True)[:kk].tolist())
                rest = [i for i in range(n_units) if i not in topset]
                perm = torch.randperm(len(rest), generator=rs)[:kk]
                rnd_accs.append(pair_accuracy(
                    model, tok, pairs,
                    ablate=mask_of([rest[i] for i in perm])))
            rnd = sum(rnd_accs) / len(rnd_accs)
            print(f"[probe] k={kk} ({100.0*kk/n_units:.2f}%): "
                  f"selected={sel:.1f} random={rnd:.1f}", flush=True)
    return base


def export(model, tokens, path_dir, model_id):
    os.makedirs(path_dir, exist_ok=True)
    sd = model.state_dict()

    def w(f, name):
        f.write(sd[name].detach().numpy().astype("<f4").tobytes())

    wpath = os.path.join(path_dir, "weights.bin")
    with open(wpath, "wb") as f:
        f.write(b"ULM1")
        f.write(struct.pack("<6I", 1, len(tokens), N_LAYERS, N_HEADS,
                            HIDDEN, MLP))
        f.write(struct.pack("<I", MAX_CTX))
        w(f, "tok.weight")
        w(f, "pos.weight")
        for i in range(N_LAYERS):
            p = f"blocks.{i}."
            for name in ["ln1.weight", "ln1.bias", "wq.weight", "wq.bias",
                         "wk.weight", "wk.bias", "wv.weight", "wv.bias",
                         "wo.weight", "wo.bias", "ln2.weight", "ln2.bias",
                         "fc.weight", "fc.bias", "proj.weight", "proj.bias"]:
                w(f, p + name)
        w(f, "lnf.weight")
        w(f, "lnf.bias")

    with open(os.path.join(path_dir, "model.json"), "w") as f:
        json.dump({
            "format": "unitloc-model/v1",
            "model_id": model_id,
            "n_layers": N_LAYERS,
            "n_heads": N_HEADS,
            "hidden_dim": HIDDEN,
            "mlp_dim": MLP,
            "max_context": MAX_CTX,
            "vocab_file": "vocab.json",
            "weights_file": "weights.bin",
            "bos_token": "<bos>",
        }, f, indent=2)
        f.write("\n")
    print(f"exported to {path_dir} ({os.path.getsize(wpath)} bytes)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=8000)
    ap.add_argument("--sentences", type=int, default=200000)
    ap.add_argument("--quick", action="store_true",
                    help="tiny run for smoke-testing the script")
    args = ap.parse_args()
    if args.quick:
        args.steps, args.sentences = 30, 2000

    torch.manual_seed(TORCH_SEED)
    with open(os.path.join(OUT_DIR, "vocab.json")) as f:
        tokens = json.load(f)["tokens"]
    tok = dg.Tokenizer(tokens)
    print(f"vocab={len(tokens)}")

    t0 = time.time()
    data = build_corpus(tok, args.sentences, CORPUS_SEED)
    print(f"corpus: {data.shape[0]} tokens ({time.time()-t0:.0f}s)")

    model = DeskLM(len(tokens))
    n_params = sum(p.numel() for p in model.parameters())
    print(f"params: {n_params}")

    opt = torch.optim.AdamW(model.parameters(), lr=2e-3, weight_decay=0.01)
    warmup = 100
    sched = torch.optim.lr_scheduler.LambdaLR(
        opt, lambda s: min((s + 1) / warmup, 1.0) *
        (0.5 * (1 + math.cos(math.pi * min(s / args.steps, 1.0))) * 0.95
         + 0.05))
    rng = torch.Generator().manual_seed(TORCH_SEED + 1)

    model.train()
    t0 = time.time()
    for step, (x, y) in enumerate(batches(data, args.steps, rng)):
        logits = model(x)
        loss = F.cross_entropy(logits.view(-1, logits.shape[-1]), y.view(-1))
        opt.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
        opt.step()
        sched.step()
        if step % 50 == 0 or step == args.steps - 1:
            dt = time.time() - t0
            print(f"step {step:5d} loss {loss.item():.3f} "
                  f"({dt/(step+1):.2f}s/step)", flush=True)
        if step > 0 and step % 400 == 0:
            export(model, tokens, OUT_DIR, "desk-lm-v1")

    model.eval()
    by_task = load_pairs(50)
    with torch.no_grad():
        for name, pairs in sorted(by_task.items()):
            print(f"[pairs] {name}: "
                  f"{pair_accuracy(model, tok, pairs):.0f}", flush=True)
    export(model, tokens, OUT_DIR, "desk-lm-v1")
    ablation_report(model, tok)


if __name__ == "__main__":
    main()
