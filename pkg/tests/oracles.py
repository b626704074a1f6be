"""Independent reference implementations used only by the tests.

None of these share code with the package; they follow the textbook
definitions as literally as possible and are deliberately slow.
"""
import math


def nw_naive(a, b, match, mismatch, gap):
    """Direct recursion on the three alignment branches, base case 0 on the boundary."""

    def M(i, j):
        if i == 0 or j == 0:
            return 0
        s = match if a[i - 1] == b[j - 1] else mismatch
        return max(M(i - 1, j - 1) + s, M(i - 1, j) + gap, M(i, j - 1) + gap)

    return M(len(a), len(b))


def ngram_similarity_naive(a, b, min_len=2, weighting="length"):
    """Enumerate every window of both sequences into lists, dedupe, intersect, sum."""
    n = min(len(a), len(b))
    max_len = n - 1
    wa, wb = [], []
    for L in range(min_len, max_len + 1):
        for i in range(len(a) - L + 1):
            wa.append(tuple(a[i:i + L]))
        for i in range(len(b) - L + 1):
            wb.append(tuple(b[i:i + L]))
    da, db = set(wa), set(wb)

    def w(p):
        return len(p) if weighting == "length" else 1

    common = sum(w(p) for p in da & db)
    return common / min(sum(w(p) for p in da), sum(w(p) for p in db))


def window_stats_naive(img, k, padding="replicate"):
    """Per-pixel two-pass mean/std over explicitly gathered padded windows.

    ``img`` is a nested list [row][col] of floats for one channel.
    """
    h, w = len(img), len(img[0])
    r = k // 2

    def px(y, x):
        if padding == "replicate":
            y = min(max(y, 0), h - 1)
            x = min(max(x, 0), w - 1)
        else:  # mirror without repeating the edge pixel
            if y < 0:
                y = -y
            if y >= h:
                y = 2 * (h - 1) - y
            if x < 0:
                x = -x
            if x >= w:
                x = 2 * (w - 1) - x
        return img[y][x]

    mean = [[0.0] * w for _ in range(h)]
    std = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            win = [px(y + dy, x + dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)]
            m = math.fsum(win) / (k * k)
            mean[y][x] = m
            std[y][x] = math.sqrt(math.fsum((v - m) ** 2 for v in win) / (k * k))
    return mean, std


def central_difference(f, x, h=1e-6, points=3):
    """Numerical gradient of scalar f at array x (modified in place, restored).

    ``points=5`` uses the fourth-order central stencil, which tolerates a much
    larger step and so keeps roundoff small on tiny gradient entries.
    """
    import numpy as np

    if points not in (3, 5):
        raise ValueError("points must be 3 or 5")
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]

        def at(dv):
            x[idx] = old + dv
            v = f()
            x[idx] = old
            return v

        if points == 3:
            g[idx] = (at(h) - at(-h)) / (2 * h)
        else:
            g[idx] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)
    return g
