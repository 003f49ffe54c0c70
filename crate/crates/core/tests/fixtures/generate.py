"""Regenerates golden.json with 50-digit arithmetic.

Everything is computed from the defining expressions (fourth-root U, the
quotient forms of alpha, the composed variable change), independently of
the rearranged formulas used by the library.

    python3 generate.py > golden.json
"""
import json

from mpmath import mp, mpf, mpc, sqrt, root, nstr

mp.dps = 50

TRIPLES = {
    "worked": (mpf(2), mpf(1), sqrt(5)),
    "swapped": (mpf(1), mpf(2), sqrt(5)),
    "negative_a3": (mpf(2), mpf(1), -sqrt(5)),
    "generic": (mpf("1.5"), mpf("0.7"), mpf("0.9")),
}


def s(x):
    return nstr(x, 45, strip_zeros=False)


def cs(z):
    z = mpc(z)
    return [s(z.real), s(z.imag)]


def derived(a1, a2, a3):
    d = a1**2 - a2**2
    r = sqrt(d**2 - a3**2)
    tot = a1**2 + a2**2
    alpha1 = (d + r) / (mpc(0, 1) * a3)
    alpha2 = (d - r) / (mpc(0, 1) * a3)
    u = root((tot - r) / (tot + r), 4)
    omega = root(a1**2 * a2**2 + a3**2 / 4, 4)
    m = 2 / omega**2 * sqrt(d**2 / a3**2 - 1)
    w1 = sqrt((tot + r) / 2)
    w2 = sqrt((tot - r) / 2)
    k1 = 1 + alpha1**2
    branch = 1 if k1.real > 0 else 2
    sign = 1 if branch == 1 else -1

    # rows: X'1, X'2, P'1, P'2 over columns x1, x2, p1, p2
    inter = [
        [a1 / (alpha2 - alpha1), -alpha2 * a2 / (alpha2 - alpha1), 0, 0],
        [a1 / (alpha1 - alpha2), -alpha1 * a2 / (alpha1 - alpha2), 0, 0],
        [0, 0, alpha1 / a1, 1 / a2],
        [0, 0, alpha2 / a1, 1 / a2],
    ]
    scale = [
        sqrt(abs(alpha1) / (1 / u)),
        sqrt(abs(alpha2) / u),
        sqrt((1 / u) / abs(alpha1)),
        sqrt(u / abs(alpha2)),
    ]
    composed = [[scale[i] * inter[i][j] for j in range(4)] for i in range(4)]

    return {
        "params": [s(a1), s(a2), s(a3)],
        "coupling": s(a3 / (2 * a1 * a2)),
        "omega1_sq": s(w1**2),
        "omega2_sq": s(w2**2),
        "alpha1": cs(alpha1),
        "alpha2": cs(alpha2),
        "u": s(u),
        "omega": s(omega),
        "m": s(m),
        "omega1": s(w1),
        "omega2": s(w2),
        "branch": branch,
        "ground_bounded": s((w1 + w2) / 2),
        "ground_naive_branch1": s((omega / u - omega * u) / 2),
        # monomial coefficients, order X1, X2, P1, P2
        "intermediate_coefficients": [
            cs(k1 / 2),
            cs((1 + alpha2**2) / 2),
            cs(omega**2 / u**2 / (2 * k1)),
            cs(u**2 * omega**2 / (2 * (1 + alpha2**2))),
        ],
        "branch_coefficients": [
            s(sign * m * omega**2 / (2 * u)),
            s(-sign * u * m * omega**2 / 2),
            s(sign / (2 * m * u)),
            s(-sign * u / (2 * m)),
        ],
        "intermediate_map": [[cs(x) for x in row] for row in inter],
        "composed_map": [[cs(x) for x in row] for row in composed],
    }


print(json.dumps({k: derived(*v) for k, v in TRIPLES.items()}, indent=1))
