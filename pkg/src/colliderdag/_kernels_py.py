"""Pure-Python triple kernels; used when the compiled extension is absent.

Mirrors ``_kernels.pyx`` operation for operation.

Slot layout per triple ``(i, j, k)``: fit ``r`` targets the r-th member
and regresses on the other two in ascending order, so slots ``2r`` and
``2r + 1`` hold the parent coefficients/contributions of that fit.
"""
from .regression import solve3

OK = 0
SINGULAR = 1
DEGENERATE_DENOM = 2
UNDEFINED = 3

_PARENTS = ((1, 2), (0, 2), (0, 1))


def score_batch(gram, eps_denom, triples, coef, mapped, icpt, status, fail_pos):
    """Fit and score every triple in ``triples`` (K x 3) into the outputs."""
    g = gram.tolist()
    eps = eps_denom.tolist()
    one = len(g) - 1
    m = g[one][one]
    for row, tri in enumerate(triples.tolist()):
        status[row] = OK
        fail_pos[row] = -1
        for r in range(3):
            q = tri[r]
            a = tri[_PARENTS[r][0]]
            b = tri[_PARENTS[r][1]]
            ga, gb, go = g[a], g[b], g[one]
            x, bad = solve3(
                ((ga[a], ga[b], ga[one]), (gb[a], gb[b], gb[one]), (go[a], go[b], go[one])),
                (ga[q], gb[q], go[q]),
            )
            if x is None:
                status[row] = SINGULAR
                fail_pos[row] = r
                break
            s = go[q]
            if not abs(s) > eps[q]:
                status[row] = DEGENERATE_DENOM
                fail_pos[row] = r
                break
            ra = x[0] * go[a] / s
            rb = x[1] * go[b] / s
            rc = m * x[2] / s
            tot = abs(ra) + abs(rb) + abs(rc)
            if not tot > 0.0:
                status[row] = UNDEFINED
                fail_pos[row] = r
                break
            coef[row, 2 * r] = x[0]
            coef[row, 2 * r + 1] = x[1]
            mapped[row, 2 * r] = abs(ra) / tot
            mapped[row, 2 * r + 1] = abs(rb) / tot
            icpt[row, r] = x[2]


def replay(triples, coef, mapped, icpt, status, strn, drct, pcnt, err):
    """Apply threshold updates for each scored triple, in row order."""
    for row, tri in enumerate(triples.tolist()):
        if status[row] != OK:
            continue
        for r in range(3):
            q = tri[r]
            for s in range(2):
                p = tri[_PARENTS[r][s]]
                v = mapped[row, 2 * r + s]
                if v > pcnt[p, q]:
                    pcnt[p, q] = v
                    strn[p, q] = coef[row, 2 * r + s]
                    drct[p, q] += 1
                    err[q] = icpt[row, r]
