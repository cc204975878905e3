"""Independent brute-force reference for the smoothed n-gram model.

Everything here is recomputed by direct scans over the padded corpus: no
code, tables, or caching is shared with the package implementation. Slow on
purpose; only used as a test oracle on small corpora.

Definitions implemented:
  * windows of every order end at predicted positions (real tokens and the
    end symbol); start padding is history only
  * the top order uses raw window counts, lower orders use continuation
    counts (number of distinct preceding words)
  * per-order discounts from counts-of-counts: Y = n1/(n1+2*n2),
    D1 = 1-2*Y*n2/n1, D2 = 2-3*Y*n3/n2, D3 = 3-4*Y*n4/n3, falling back to
    0.5*k when the denominator is zero, clamped into [1e-9, k-1e-9]
  * P(w|h) = max(c(h,w)-D,0)/c(h) + gamma(h)*P(w|h'), skipping levels where
    c(h) = 0, bottoming out at a uniform distribution over the prediction
    space (vocabulary words, the unknown marker, and the end symbol)
"""

from collections import Counter

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"


class ReferenceKN:
    def __init__(self, sentences, vocab_words, order=5):
        self.order = order
        self.vocab = set(vocab_words) - {UNK, BOS, EOS}
        self.uniform = 1.0 / (len(self.vocab) + 2)
        self.raw = {k: Counter() for k in range(1, order + 1)}
        for sent in sentences:
            toks = [self._map(w) for w in sent]
            padded = [BOS] * (order - 1) + list(toks) + [EOS]
            for i in range(order - 1, len(padded)):
                for k in range(1, order + 1):
                    self.raw[k][tuple(padded[i - k + 1 : i + 1])] += 1
        self.used = {order: dict(self.raw[order])}
        for k in range(order - 1, 0, -1):
            cont = Counter()
            for gram in self.raw[k + 1]:
                cont[gram[1:]] += 1
            self.used[k] = dict(cont)
        self.discounts = {k: self._order_discounts(k) for k in range(1, order + 1)}

    def _map(self, w):
        return w if (w in self.vocab or w in (UNK, BOS, EOS)) else UNK

    def _order_discounts(self, k):
        counts_of_counts = Counter(self.used[k].values())
        n1 = counts_of_counts[1]
        n2 = counts_of_counts[2]
        n3 = counts_of_counts[3]
        n4 = counts_of_counts[4]
        y = n1 / (n1 + 2 * n2) if (n1 + 2 * n2) > 0 else 0.0
        out = []
        for bucket, (num, den) in enumerate(((n2, n1), (n3, n2), (n4, n3)), start=1):
            if den == 0:
                d = 0.5 * bucket
            else:
                d = bucket - (bucket + 1) * y * num / den
            out.append(min(max(d, 1e-9), bucket - 1e-9))
        return tuple(out)

    def prob(self, history, word):
        h = tuple(self._map(w) for w in history)
        if len(h) > self.order - 1:
            h = h[len(h) - (self.order - 1) :]
        return self._p(h, self._map(word))

    def _p(self, h, w):
        k = len(h) + 1
        lower = self._p(h[1:], w) if k > 1 else self.uniform
        table = self.used[k]
        total = sum(c for g, c in table.items() if g[:-1] == h)
        if total == 0:
            return lower
        d1, d2, d3 = self.discounts[k]
        n1 = sum(1 for g, c in table.items() if g[:-1] == h and c == 1)
        n2 = sum(1 for g, c in table.items() if g[:-1] == h and c == 2)
        n3p = sum(1 for g, c in table.items() if g[:-1] == h and c >= 3)
        gamma = (d1 * n1 + d2 * n2 + d3 * n3p) / total
        c = table.get(h + (w,), 0)
        if c == 0:
            discounted = 0.0
        elif c == 1:
            discounted = c - d1
        elif c == 2:
            discounted = c - d2
        else:
            discounted = c - d3
        return max(discounted, 0.0) / total + gamma * lower
