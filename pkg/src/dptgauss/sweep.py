"""Parameter files, threshold sweeps and their CSV/manifest output."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import numbers
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .analysis import DEFAULT_CHOI_R, Direction, eb_threshold, locate_eb_threshold, thresholds, verify_threshold_numerically
from .errors import InvalidParams
from .model import POLE_GUARD, DptParams, PumpConfig
from .separability import SDP_TOL

PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(DptParams))
REQUIRED_FIELDS = tuple(f.name for f in dataclasses.fields(DptParams) if f.default is dataclasses.MISSING)
EXTRA_KEYS = ("sigma_a", "sigma_b", "r", "tol")
OUTPUTS = ("sep", "ppt", "up_eb", "down_eb")
METHODS = ("closed", "numeric")


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidParams(f"field {key!r} must be a number, got {value!r}")
    return float(value)


def _sigma(key, value):
    if isinstance(value, bool) or value not in (-1, 1):
        raise InvalidParams(f"field {key!r} must be -1 or +1, got {value!r}")
    return int(value)


def parse_params(obj, required=REQUIRED_FIELDS):
    """Validate a flat parameter object.

    Returns ``(params, pump, extras)`` where ``extras`` holds the optional
    ``r`` and ``tol`` entries that were present.
    """
    if not isinstance(obj, dict):
        raise InvalidParams("parameter file must hold a JSON object")
    unknown = sorted(set(obj) - set(PARAM_FIELDS) - set(EXTRA_KEYS))
    if unknown:
        raise InvalidParams(f"unknown field(s): {', '.join(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise InvalidParams(f"missing required field(s): {', '.join(missing)}")
    values = {k: _number(k, obj[k]) for k in PARAM_FIELDS if k in obj}
    pump = PumpConfig(_sigma("sigma_a", obj.get("sigma_a", -1)), _sigma("sigma_b", obj.get("sigma_b", -1)))
    extras = {k: _number(k, obj[k]) for k in ("r", "tol") if k in obj}
    if "r" in extras and not extras["r"] > 0:
        raise InvalidParams(f"field 'r' must be positive, got {extras['r']}")
    if "tol" in extras and not extras["tol"] > 0:
        raise InvalidParams(f"field 'tol' must be positive, got {extras['tol']}")
    return DptParams(**values), pump, extras


def load_json(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return json.loads(raw.decode("utf-8")), raw
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidParams(f"{path}: not valid JSON ({exc})") from None


def load_params(path):
    obj, _ = load_json(path)
    return parse_params(obj)


@dataclass(frozen=True)
class SweepSpec:
    """Sweep of one parameter, or several tied to the same value, over ``[lo, hi]``."""

    param: tuple
    lo: float
    hi: float
    count: int
    fixed: dict
    outputs: tuple = OUTPUTS

    def __post_init__(self):
        names = (self.param,) if isinstance(self.param, str) else tuple(self.param)
        if not names:
            raise InvalidParams("field 'param' must name at least one parameter")
        bad = [n for n in names if n not in PARAM_FIELDS]
        if bad:
            raise InvalidParams(f"field 'param': not a device parameter: {', '.join(map(str, bad))}")
        if not self.lo < self.hi:
            raise InvalidParams(f"sweep needs lo < hi, got lo={self.lo}, hi={self.hi}")
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 2:
            raise InvalidParams(f"field 'count' must be an integer >= 2, got {self.count!r}")
        outputs = tuple(self.outputs)
        bad = [o for o in outputs if o not in OUTPUTS]
        if bad or not outputs:
            raise InvalidParams(f"field 'outputs' must be a nonempty subset of {list(OUTPUTS)}")
        object.__setattr__(self, "param", names)
        object.__setattr__(self, "outputs", outputs)
        # validates the fixed values against one sweep point
        self.point(self.lo)

    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict):
            raise InvalidParams("sweep file must hold a JSON object")
        allowed = {"param", "lo", "hi", "count", "fixed", "outputs"}
        unknown = sorted(set(obj) - allowed)
        if unknown:
            raise InvalidParams(f"unknown field(s): {', '.join(unknown)}")
        missing = [k for k in ("param", "lo", "hi", "count", "fixed") if k not in obj]
        if missing:
            raise InvalidParams(f"missing required field(s): {', '.join(missing)}")
        fixed = obj["fixed"]
        if not isinstance(fixed, dict):
            raise InvalidParams("field 'fixed' must be an object")
        unknown = sorted(set(fixed) - set(PARAM_FIELDS))
        if unknown:
            raise InvalidParams(f"unknown field(s) in 'fixed': {', '.join(unknown)}")
        param = obj["param"]
        if not (isinstance(param, str) or (isinstance(param, list) and all(isinstance(p, str) for p in param))):
            raise InvalidParams("field 'param' must be a parameter name or a list of names")
        return cls(
            param=param,
            lo=_number("lo", obj["lo"]),
            hi=_number("hi", obj["hi"]),
            count=obj["count"],
            fixed={k: _number(k, v) for k, v in fixed.items()},
            outputs=obj.get("outputs", OUTPUTS),
        )

    def values(self):
        # weighted endpoints keep symmetric grids exact (0.5 stays 0.5)
        k = np.arange(self.count)
        m = self.count - 1
        return (self.lo * (m - k) + self.hi * k) / m

    def point(self, value) -> DptParams:
        obj = {"n_th": 0.0, **self.fixed, **{name: float(value) for name in self.param}}
        missing = [k for k in REQUIRED_FIELDS if k not in obj]
        if missing:
            raise InvalidParams(f"missing required field(s) in 'fixed': {', '.join(missing)}")
        return DptParams(**obj)

    def as_dict(self):
        return {
            "param": list(self.param),
            "lo": self.lo,
            "hi": self.hi,
            "count": self.count,
            "fixed": dict(sorted(self.fixed.items())),
            "outputs": list(self.outputs),
        }


@dataclass(frozen=True)
class RunManifest:
    tool_version: str
    input_sha256: str
    tolerances: dict
    timestamp: str
    output_sha256: str = ""
    spec: dict = None

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"


def normalize(threshold, d: DptParams):
    """Quantum cooperativity ``C/n_th`` at the boundary when ``C_a = C_b``, else the raw ``n_th``.

    Returns ``(value, normalized)``.
    """
    if d.C_a != d.C_b:
        return threshold, False
    if threshold == 0:
        return math.inf, True
    return d.C_a / threshold, True


def threshold_row(d: DptParams, method="closed", r=DEFAULT_CHOI_R, tol=SDP_TOL):
    """Occupancy thresholds in ``n_th`` for one device."""
    if method == "closed":
        th = thresholds(d)
        return {
            "sep": float(th.sep_threshold),
            "ppt": float(th.ppt_threshold),
            "up_eb": float(eb_threshold(d, Direction.UPCONVERT)),
            "down_eb": float(eb_threshold(d, Direction.DOWNCONVERT)),
        }
    if method == "numeric":
        return {
            "sep": float(verify_threshold_numerically(d, r, which="separability", tol=tol).value),
            "ppt": float(verify_threshold_numerically(d, r, which="ppt").value),
            "up_eb": float(locate_eb_threshold(d, Direction.UPCONVERT)),
            "down_eb": float(locate_eb_threshold(d, Direction.DOWNCONVERT)),
        }
    raise InvalidParams(f"unknown sweep method {method!r}, expected one of {list(METHODS)}")


def _evaluate(args):
    value, d, method, r, tol, outputs = args
    raw = threshold_row(d, method, r, tol)
    row = {"swept": float(value)}
    flag = True
    for key in outputs:
        row[key], flag = normalize(raw[key], d)
    row["normalized"] = flag
    return row


def run_sweep(spec: SweepSpec, method="closed", r=DEFAULT_CHOI_R, tol=SDP_TOL, jobs=1):
    """Evaluate every sweep point; rows come back in input order."""
    tasks = [(v, spec.point(v), method, r, tol, spec.outputs) for v in spec.values()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate, tasks))
    return [_evaluate(t) for t in tasks]


def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def rows_to_csv(rows, outputs=OUTPUTS):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["swept", *outputs, "normalized"]
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


def read_csv(text):
    """Parse sweep CSV text back into rows of floats."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({k: (v == "1") if k == "normalized" else float(v) for k, v in rec.items()})
    return rows


def make_manifest(version, raw_input, csv_text, tolerances, spec=None):
    return RunManifest(
        tool_version=version,
        input_sha256=hashlib.sha256(raw_input).hexdigest(),
        tolerances=tolerances,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        output_sha256=hashlib.sha256(csv_text.encode("utf-8")).hexdigest(),
        spec=spec,
    )


def manifest_path(csv_path):
    path = str(csv_path)
    stem = path[:-4] if path.endswith(".csv") else path
    return stem + ".manifest.json"


def default_tolerances(method, r, tol):
    out = {"method": method, "pole_guard": POLE_GUARD}
    if method == "numeric":
        out.update({"sdp_tol": tol, "choi_r": r})
    return out
