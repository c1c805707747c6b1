"""Brute-force oracle for the synthetic two-chain experiment.

Re-implements the corpus generator and the few-shot sampler, then runs
NCD + 3NN with compressed sizes estimated from exact (unquantized) adaptive
code lengths: ceil(bits / 8) + 1 bytes. Prints the corpus fingerprint, the
KL rates between the chains and per-trial accuracies for the order-2 and
uniform models.
"""
import math

M64 = (1 << 64) - 1
A = 8


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & M64

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & M64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        return z ^ (z >> 31)

    def below(self, bound):
        limit = bound * (M64 // bound)
        while True:
            x = self.next()
            if x < limit:
                return x % bound


def make_chain(seed):
    rng = SplitMix64(seed)
    rows = []
    for _ in range(A * A):
        row = []
        for _ in range(A):
            u = rng.below(1000) + 1
            row.append(u + 100)
        rows.append(row)
    return rows


def draw(w, rng):
    target = rng.below(sum(w))
    for s, x in enumerate(w):
        if target < x:
            return s
        target -= x
    return len(w) - 1


def corpus(seed=20241014, per_class=120, lo=150, hi=300):
    chains = [make_chain(seed ^ 0xA5A5A5A5), make_chain(seed ^ 0x5A5A5A5A)]
    rng = SplitMix64(seed)
    docs = []
    for c in range(2):
        for _ in range(per_class):
            n = lo + rng.below(hi - lo + 1)
            p2, p1 = rng.below(A), rng.below(A)
            text = [p2, p1]
            while len(text) < n:
                s = draw(chains[c][p2 * A + p1], rng)
                text.append(s)
                p2, p1 = p1, s
            docs.append(("markov:%d" % len(docs), "".join(chr(97 + s) for s in text), c))
    return chains, docs


def fingerprint(docs):
    names = ["chain_a", "chain_b"]
    h = 0xcbf29ce484222325
    for i, t, c in docs:
        for ch in (i + "\t" + names[c] + "\t" + t + "\n").encode():
            h ^= ch
            h = (h * 0x100000001b3) & M64
    return h


def kl_rate(a, b):
    def prob(ch, ctx, s):
        return ch[ctx][s] / sum(ch[ctx])
    pi = [1.0 / (A * A)] * (A * A)
    for _ in range(2000):
        nxt = [0.0] * (A * A)
        for ctx in range(A * A):
            p1 = ctx % A
            for s in range(A):
                nxt[p1 * A + s] += pi[ctx] * prob(a, ctx, s)
        pi = nxt
    return sum(pi[ctx] * prob(a, ctx, s) * math.log2(prob(a, ctx, s) / prob(b, ctx, s))
               for ctx in range(A * A) for s in range(A))


def order2_bits(data):
    """Laplace (add-one over 256) with longest-seen-context backoff."""
    tables = [dict(), dict(), dict()]
    bits = 0.0
    for t, s in enumerate(data):
        counts = None
        for length in range(min(2, t), -1, -1):
            key = data[t - length:t]
            counts = tables[length].get(key)
            if counts is not None:
                break
        if counts is None:
            bits += 8.0
        else:
            bits -= math.log2((counts[0].get(s, 0) + 1) / (counts[1] + 256))
        for length in range(0, min(2, t) + 1):
            key = data[t - length:t]
            entry = tables[length].setdefault(key, [dict(), 0])
            entry[0][s] = entry[0].get(s, 0) + 1
            entry[1] += 1
    return bits


def size(bits):
    return math.ceil(bits / 8) + 1


def order2_size(data):
    return size(order2_bits(data))


def uniform_size(data):
    return size(8.0 * len(data))


def trial_seed(seed, trial):
    a = SplitMix64(seed).next()
    return SplitMix64(a ^ ((0xD1B54A32D192ED03 * (trial + 1)) & M64)).next()


def partial_shuffle(pool, k, rng):
    for i in range(k):
        j = i + rng.below(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]


def apportion(pops, total):
    s = sum(pops)
    counts = [p * total // s for p in pops]
    rems = [p * total % s for p in pops]
    order = sorted(range(len(pops)), key=lambda i: (-rems[i], i))
    left = total - sum(counts)
    for i in order[:left]:
        counts[i] += 1
    return counts


def sample(docs, shots, tests, seed, trial):
    rng = SplitMix64(trial_seed(seed, trial))
    taken = set()
    train = []
    for c in range(2):
        pool = [i for i, d in enumerate(docs) if d[2] == c]
        partial_shuffle(pool, shots, rng)
        train += pool[:shots]
        taken.update(pool[:shots])
    test_pool = [[i for i, d in enumerate(docs) if d[2] == c and i not in taken] for c in range(2)]
    per = apportion([len(p) for p in test_pool], tests)
    chosen = []
    for c in range(2):
        partial_shuffle(test_pool[c], per[c], rng)
        chosen += test_pool[c][:per[c]]
    return train, sorted(chosen)


def knn(row, labels, k):
    order = sorted(range(len(row)), key=lambda i: (row[i], i))[:k]
    tally = {}
    for i in order:
        v = tally.setdefault(labels[i], [0, 0.0])
        v[0] += 1
        v[1] += row[i]
    best = None
    for c in sorted(tally):
        if best is None or tally[c][0] > tally[best][0] or (
                tally[c][0] == tally[best][0] and tally[c][1] < tally[best][1]):
            best = c
    return best


def run(docs, size_fn, shots=10, tests=100, trials=5, seed=0, k=3):
    enc = [d[1].encode() for d in docs]
    cache = {}

    def c1(i):
        if i not in cache:
            cache[i] = size_fn(enc[i])
        return cache[i]

    accs = []
    for trial in range(trials):
        train, test = sample(docs, shots, tests, seed, trial)
        labels = [docs[i][2] for i in train]
        correct = 0
        for t in test:
            row = []
            for r in train:
                cx, cy, cxy = c1(t), c1(r), size_fn(enc[t] + enc[r])
                row.append((cxy - min(cx, cy)) / max(cx, cy))
            correct += knn(row, labels, k) == docs[t][2]
        accs.append(correct / len(test))
    return accs


if __name__ == "__main__":
    chains, docs = corpus()
    print("fingerprint 0x%016x" % fingerprint(docs))
    print("kl_ab %.12f" % kl_rate(chains[0], chains[1]))
    print("kl_ba %.12f" % kl_rate(chains[1], chains[0]))
    o2 = run(docs, order2_size)
    un = run(docs, uniform_size)
    print("order2", o2, "mean %.4f" % (sum(o2) / len(o2)))
    print("uniform", un, "mean %.4f" % (sum(un) / len(un)))
