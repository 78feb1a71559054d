"""
How expensive is a cut?
=======================

The explicit decomposition costs 2 sum|lam_j| per unit time. The Choi
trace-norm bound says what any decomposition must pay. When the factors are
traceless and mutually orthogonal the two coincide; otherwise the
explicit route overpays.
"""

from pqsim import PauliString
from pqsim.models import InteractionTerm
from pqsim.verify import check_condition1, choi_lower_bound


def term(lam, *labels):
    return InteractionTerm(lam, tuple(PauliString.from_label(s) for s in labels))


cases = {
    "XXX + YYY + ZZZ": ([term(1, "X", "X", "X"), term(0.5, "Y", "Y", "Y"), term(0.25, "Z", "Z", "Z")], (1, 1, 1)),
    "XX + XZ": ([term(1, "X", "X"), term(1, "X", "Z")], (1, 1)),
    "XX + YY (hopping)": ([term(0.4, "X", "X"), term(0.4, "Y", "Y")], (1, 1)),
}

for name, (terms, sizes) in cases.items():
    rep = choi_lower_bound(terms, sizes)
    c1 = check_condition1(terms, sizes)
    print(f"{name:20s} bound {rep.lower_bound:.4f}  explicit {rep.explicit_cost_rate:.4f}  condition-1 {c1.holds}")
    for v in c1.violations:
        print("    ", v)
