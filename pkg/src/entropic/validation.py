"""Statistical checks with uniform pass/fail reports."""

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional
from xml.etree import ElementTree as ET

import numpy as np
from scipy import stats

from .errors import PreconditionError

KS_ALPHA = 1e-3
Z_LIMIT = 5.0
MIN_KS = 100
MIN_MOMENT = 1000


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    threshold: float
    passed: bool
    p_value: Optional[float] = None
    n: Optional[int] = None
    seed: Optional[int] = None
    detail: dict = field(default_factory=dict)
    replay: Optional[str] = None

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        p = "" if self.p_value is None else f" p={self.p_value:.3g}"
        return f"{tag} {self.name}: statistic={self.statistic:.6g} threshold={self.threshold:.6g}{p}"

    def to_json(self):
        d = asdict(self)
        return {k: _finite_or_str(v) for k, v in d.items()}


def _finite_or_str(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _finite_or_str(x) for k, x in v.items()}
    return v


def ks_test(samples, cdf, name="ks", seed=None, alpha=KS_ALPHA):
    """One-sample KS test with the asymptotic p-value; passes when ``p >= alpha``."""
    x = np.asarray(samples, dtype=float).ravel()
    if len(x) < MIN_KS:
        raise PreconditionError(f"KS test needs at least {MIN_KS} samples, got {len(x)}")
    res = stats.kstest(x, cdf, method="asymp")
    p = float(res.pvalue)
    return TestReport(name, float(res.statistic), alpha, p >= alpha, p, len(x), seed)


def ks_2samp_test(a, b, name="ks2", seed=None, alpha=KS_ALPHA):
    """Two-sample KS test; passes when ``p >= alpha``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if min(len(a), len(b)) < MIN_KS:
        raise PreconditionError(f"KS test needs at least {MIN_KS} samples per side")
    res = stats.ks_2samp(a, b, method="asymp")
    p = float(res.pvalue)
    return TestReport(name, float(res.statistic), alpha, p >= alpha, p, len(a) + len(b), seed)


def moment_check(samples, claimed_mean, claimed_variance_bound=None, name="moment", seed=None,
                 z_limit=Z_LIMIT):
    """z-statistic of the sample mean against ``claimed_mean``.

    Uses the sample variance, or ``claimed_variance_bound`` when given and
    larger. Zero variance gives ``z = 0`` if the samples equal the claim and
    ``z = inf`` otherwise.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if len(x) < MIN_MOMENT:
        raise PreconditionError(f"moment check needs at least {MIN_MOMENT} samples, got {len(x)}")
    constant = bool(np.all(x == x[0]))
    var = 0.0 if constant else float(np.var(x, ddof=1))
    if claimed_variance_bound is not None:
        var = max(var, float(claimed_variance_bound))
    # a constant sample is compared exactly, free of summation rounding
    mean = float(x[0]) if constant else float(x.mean())
    diff = mean - float(claimed_mean)
    se = math.sqrt(var / len(x))
    if se == 0.0:
        z = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    else:
        z = diff / se
    return TestReport(name, z, z_limit, abs(z) <= z_limit, None, len(x), seed,
                      {"mean": mean, "claimed": float(claimed_mean), "se": se})


def aggregate(reports):
    """Exit status for a batch: 0 when every report passed, else 1."""
    return 0 if all(r.passed for r in reports) else 1


def write_json(reports, path):
    ordered = sorted(reports, key=lambda r: r.name)
    doc = {"passed": aggregate(ordered) == 0, "reports": [r.to_json() for r in ordered]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_junit(reports, path, suite="entropic"):
    ordered = sorted(reports, key=lambda r: r.name)
    root = ET.Element("testsuite", name=suite, tests=str(len(ordered)),
                      failures=str(sum(not r.passed for r in ordered)))
    for r in ordered:
        case = ET.SubElement(root, "testcase", classname=suite, name=r.name)
        if not r.passed:
            msg = r.line() + (f" replay: {r.replay}" if r.replay else "")
            ET.SubElement(case, "failure", message=msg)
        out = ET.SubElement(case, "system-out")
        out.text = json.dumps(r.to_json(), sort_keys=True)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
