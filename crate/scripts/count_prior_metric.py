"""Independent enumeration of the count-prior role-prediction metric for the
Rescue scenario (1 red, 1 green, 4 blue; red sees every role).

Every (observer, subject) pair over all six players is enumerated, including
self pairs. The metric is the geometric mean of the probability each observer
assigns to each subject's true role.
"""
from fractions import Fraction
import itertools
import math

COUNTS = {"red": 1, "green": 1, "blue": 4}


def roles():
    out = []
    for team, n in COUNTS.items():
        out.extend([team] * n)
    return out


def prior(observer_role, subject_role, same_player):
    if same_player or observer_role == "red":
        return Fraction(1)
    others = dict(COUNTS)
    others[observer_role] -= 1
    return Fraction(others[subject_role], sum(others.values()))


def metric(observer_filter):
    rs = roles()
    logs = []
    for (i, ro), (j, rs_) in itertools.product(enumerate(rs), repeat=2):
        if observer_filter(ro):
            logs.append(math.log(prior(ro, rs_, i == j)))
    return math.exp(sum(logs) / len(logs)), len(logs)


if __name__ == "__main__":
    print("all observers: %.17g over %d pairs" % metric(lambda r: True))
    print("blue observers: %.17g over %d pairs" % metric(lambda r: r == "blue"))
    print("red observers: %.17g over %d pairs" % metric(lambda r: r == "red"))
