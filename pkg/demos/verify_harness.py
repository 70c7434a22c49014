"""
Checking the lazy operators, and checking the checks
====================================================

The algebraic suite holds for every seed; the statistical suite compares
the lazy and dense backends with two-sample KS tests.  Injecting a known
defect must make at least one check fail.
"""

from lazyrm import HDGinibre, RandomSource, faults
from lazyrm.verify import consistency_suite, equivalence_suite, haar_probe_fixture, ista_fixture

op = HDGinibre(64, 48, 1.0, RandomSource(0))
print("\n".join(consistency_suite(op, probes=10).lines()))

with faults.inject("skip-reflector"):
    bad = consistency_suite(HDGinibre(64, 48, 1.0, RandomSource(0)), probes=10)
print("with a dropped reflector, failing checks:", bad.failed)

for rep in equivalence_suite(ista_fixture(32, 32, 5), trials=2000):
    print(rep.line())

with faults.inject("uncorrected-qr"):
    reps = equivalence_suite(haar_probe_fixture(16), trials=1000, retry=False)
print("raw QR as the Haar oracle:", [r.line() for r in reps if not r.passed][:1])
