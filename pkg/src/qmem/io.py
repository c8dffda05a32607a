"""File formats, counts ingestion and parameter sweeps.

JSON conventions: complex numbers are ``[re, im]`` pairs and matrices are
lists of rows. CSV output uses a fixed 12-significant-digit format.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .channels import QuantumChannel, family
from .errors import InvalidInputError, ParseError
from .games import Game
from .robustness import eig_lower_bound, moment_lower_bound, robustness_ppt


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used by every CSV writer."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


# --- matrices -------------------------------------------------------------


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"{where}: expected a nonempty list of rows")
    rows = []
    width = None
    for r, row in enumerate(obj):
        if not isinstance(row, list):
            raise ParseError(f"{where}[{r}]: expected a list of [re, im] pairs")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"{where}[{r}]: row length {len(row)} differs from {width}")
        vals = []
        for c, z in enumerate(row):
            if (
                isinstance(z, list)
                and len(z) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)
            ):
                vals.append(complex(z[0], z[1]))
            else:
                raise ParseError(f"{where}[{r}][{c}]: expected [re, im], got {z!r}")
        rows.append(vals)
    return np.array(rows, dtype=complex)


def _load_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _field(obj, key, where, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    val = obj[key]
    if kind is not None and (not isinstance(val, kind) or (isinstance(val, bool) and kind is not bool)):
        raise ParseError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {val!r}")
    return val


# --- channels, states, games ---------------------------------------------


def channel_to_json(ch: QuantumChannel) -> dict:
    out = {"d_in": ch.d_in, "d_out": ch.d_out}
    if ch.label:
        out["label"] = ch.label
    if ch.kraus is not None:
        out["kraus"] = [matrix_to_json(k) for k in ch.kraus]
    else:
        out["choi"] = matrix_to_json(ch.choi.matrix)
    return out


def channel_from_json(obj, where: str = "channel") -> QuantumChannel:
    d_in = _field(obj, "d_in", where, int)
    d_out = _field(obj, "d_out", where, int)
    label = obj.get("label", "")
    if "kraus" in obj:
        ks = obj["kraus"]
        if not isinstance(ks, list) or not ks:
            raise ParseError(f"{where}.kraus: expected a nonempty list of matrices")
        mats = [matrix_from_json(k, f"{where}.kraus[{i}]") for i, k in enumerate(ks)]
        for i, k in enumerate(mats):
            if k.shape != (d_out, d_in):
                raise ParseError(f"{where}.kraus[{i}]: shape {k.shape}, expected ({d_out}, {d_in})")
        return QuantumChannel.from_kraus(mats, label=label)
    if "choi" in obj:
        return QuantumChannel.from_choi(matrix_from_json(obj["choi"], f"{where}.choi"), d_in, d_out, label)
    raise ParseError(f"{where}: needs a 'kraus' or 'choi' field")


def save_channel(ch: QuantumChannel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_json(ch), indent=1) + "\n")


def load_channel(path) -> QuantumChannel:
    return channel_from_json(_load_json(path), str(path))


def load_matrix(path) -> np.ndarray:
    """A matrix file: either a bare nested list or ``{"matrix": ...}``."""
    obj = _load_json(path)
    if isinstance(obj, dict):
        obj = _field(obj, "matrix", str(path))
    return matrix_from_json(obj, str(path))


def save_matrix(m, path) -> None:
    Path(path).write_text(json.dumps({"matrix": matrix_to_json(m)}) + "\n")


def game_to_json(g: Game) -> dict:
    out = {
        "label": g.label,
        "inputs": [matrix_to_json(s) for s in g.inputs],
        "observables": [matrix_to_json(o) for o in g.observables],
        "alpha": g.coefficients.tolist(),
        "eb_normalized": bool(g.eb_normalized),
    }
    if g.setting_coefficients is not None:
        out["setting_coefficients"] = list(g.setting_coefficients)
    return out


def game_from_json(obj, where: str = "game") -> Game:
    ins = _field(obj, "inputs", where, list)
    obs = _field(obj, "observables", where, list)
    alpha = _field(obj, "alpha", where, list)
    try:
        alpha_arr = np.array(alpha, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}.alpha: not a real matrix") from exc
    return Game(
        tuple(matrix_from_json(s, f"{where}.inputs[{i}]") for i, s in enumerate(ins)),
        tuple(matrix_from_json(o, f"{where}.observables[{j}]") for j, o in enumerate(obs)),
        alpha_arr,
        str(obj.get("label", "")),
        bool(obj.get("eb_normalized", False)),
        obj.get("setting_coefficients"),
    )


def load_game(path) -> Game:
    return game_from_json(_load_json(path), str(path))


def save_game(g: Game, path) -> None:
    Path(path).write_text(json.dumps(game_to_json(g), indent=1) + "\n")


# --- counts ingestion -----------------------------------------------------


@dataclass(frozen=True)
class Setting:
    input_index: int
    observable_index: int
    shots: int
    successes: int
    label: str = ""


@dataclass(frozen=True)
class CountsRecord:
    """Measured settings of one game run plus the payoff's linear form.

    ``score = offset + sum_k c_k * successes_k / shots_k``. The offset carries
    the contribution of settings whose probabilities are fixed (for example
    the identity observable), so it is zero for a plain linear combination.
    """

    game_label: str
    settings: tuple
    coefficient_vector: tuple
    offset: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.settings) != len(self.coefficient_vector):
            raise InvalidInputError(
                f"{len(self.settings)} settings but {len(self.coefficient_vector)} coefficients"
            )
        for k, s in enumerate(self.settings):
            if s.shots < 1:
                raise InvalidInputError(f"settings[{k}].shots must be >= 1, got {s.shots}")
            if not 0 <= s.successes <= s.shots:
                raise InvalidInputError(
                    f"settings[{k}].successes={s.successes} outside [0, shots={s.shots}]"
                )


def counts_from_json(obj, where: str = "counts") -> CountsRecord:
    label = _field(obj, "game_label", where, str)
    raw = _field(obj, "settings", where, list)
    coeffs = _field(obj, "coefficient_vector", where, list)
    settings = []
    for k, s in enumerate(raw):
        w = f"{where}.settings[{k}]"
        settings.append(
            Setting(
                _field(s, "i", w, int),
                _field(s, "j", w, int),
                _field(s, "shots", w, int),
                _field(s, "successes", w, int),
                str(s.get("label", "")),
            )
        )
    for k, c in enumerate(coeffs):
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise ParseError(f"{where}.coefficient_vector[{k}]: expected a number, got {c!r}")
    offset = obj.get("offset", 0.0)
    if not isinstance(offset, (int, float)) or isinstance(offset, bool):
        raise ParseError(f"{where}.offset: expected a number, got {offset!r}")
    meta = {k: v for k, v in obj.items() if k not in ("game_label", "settings", "coefficient_vector", "offset")}
    try:
        return CountsRecord(label, tuple(settings), tuple(float(c) for c in coeffs), float(offset), meta)
    except InvalidInputError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def counts_to_json(rec: CountsRecord) -> dict:
    out = dict(rec.meta)
    out.update(
        game_label=rec.game_label,
        offset=rec.offset,
        coefficient_vector=list(rec.coefficient_vector),
        settings=[
            {"i": s.input_index, "j": s.observable_index, "shots": s.shots, "successes": s.successes, "label": s.label}
            for s in rec.settings
        ],
    )
    return out


def load_counts(path) -> list[CountsRecord]:
    """A counts file holds one record or ``{"records": [...]}``."""
    obj = _load_json(path)
    if isinstance(obj, dict) and "records" in obj:
        recs = obj["records"]
        if not isinstance(recs, list):
            raise ParseError(f"{path}.records: expected a list")
        return [counts_from_json(r, f"{path}.records[{k}]") for k, r in enumerate(recs)]
    return [counts_from_json(obj, str(path))]


def ingest_counts(record: CountsRecord) -> tuple[float, float, float]:
    """``(score, std, score - 1)`` with binomial standard errors (1 sigma)."""
    score = record.offset
    var = 0.0
    for c, s in zip(record.coefficient_vector, record.settings):
        p = s.successes / s.shots
        score += c * p
        var += c * c * p * (1.0 - p) / s.shots
    return score, math.sqrt(var), score - 1.0


def shipped_counts(name: str) -> list[CountsRecord]:
    """Bundled experiment counts: ``dephasing``, ``erasure`` or ``damping``."""
    fname = f"counts_{name}.json"
    try:
        ref = resources.files("qmem.data").joinpath(fname)
        text = ref.read_text()
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise InvalidInputError(f"no shipped counts named {name!r}") from exc
    obj = json.loads(text)
    return [counts_from_json(r, f"{fname}.records[{k}]") for k, r in enumerate(obj["records"])]


def find_record(records, source: str, p: float) -> CountsRecord:
    for r in records:
        if r.meta.get("source") == source and abs(r.meta.get("p", -1) - p) < 1e-12:
            return r
    raise InvalidInputError(f"no record for source={source!r}, p={p}")


# --- sweeps ---------------------------------------------------------------

METHOD_ORDER = ("eig", "moment", "sdp", "sdp-gen", "ent", "ent-gen")
_VARIANT = {"sdp": "standard", "sdp-gen": "generalized", "ent": "entanglement", "ent-gen": "entanglement_generalized"}


def parse_method(token: str) -> tuple[str, int | None]:
    """``eig``, ``moment`` / ``moment:K``, ``sdp``, ``sdp-gen``, ``ent``, ``ent-gen``."""
    token = token.strip()
    if token.startswith("moment"):
        k = 2
        if ":" in token:
            try:
                k = int(token.split(":", 1)[1])
            except ValueError:
                raise InvalidInputError(f"bad moment order in {token!r}") from None
        return "moment", k
    if token not in METHOD_ORDER:
        raise InvalidInputError(f"unknown method {token!r}; choose from {', '.join(METHOD_ORDER)}")
    return token, None


def compute(channel: QuantumChannel, method: str, k: int | None = None, options=None):
    if method == "eig":
        return eig_lower_bound(channel)
    if method == "moment":
        return moment_lower_bound(channel, 2 if k is None else k)
    if method in _VARIANT:
        return robustness_ppt(channel, _VARIANT[method], options)
    raise InvalidInputError(f"unknown method {method!r}")


def family_channel(name: str, p: float) -> QuantumChannel:
    if name == "lindblad_dephasing":
        return family(name, 1.0, p)
    if name == "identity":
        raise InvalidInputError("identity has no continuous parameter to sweep")
    return family(name, p)


def sweep(family_name: str, p_grid, methods, workers: int = 1) -> list[dict]:
    """One row per ``(p, method)``, ordered by ``p`` then method, regardless of worker timing."""
    parsed = [parse_method(m) if isinstance(m, str) else m for m in methods]
    grid = [float(p) for p in p_grid]
    for p in grid:
        family_channel(family_name, p)  # validate up front

    def job(args):
        p, (method, k) = args
        ch = family_channel(family_name, p)
        t0 = time.perf_counter()
        res = compute(ch, method, k)
        dt = time.perf_counter() - t0
        tag = f"moment:{k}" if method == "moment" else method
        return {"family": family_name, "p": p, "method": tag, "value": res.value, "is_exact": res.is_exact, "wall_time": dt}

    tasks = [(p, m) for p in grid for m in parsed]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, tasks))
    else:
        rows = [job(t) for t in tasks]
    order = {m: i for i, m in enumerate(parsed)}
    rows.sort(key=lambda r: (r["p"], order[parse_method(r["method"])]))
    return rows


SWEEP_COLUMNS = ("family", "p", "method", "value", "is_exact", "wall_time")


def write_rows_csv(rows, columns, path_or_file) -> None:
    close = False
    if isinstance(path_or_file, (str, Path)):
        fh = open(path_or_file, "w", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        for row in rows:
            wr.writerow([fmt(row[c]) for c in columns])
    finally:
        if close:
            fh.close()


def trajectory_rows(traj, variant: str) -> list[dict]:
    return [
        {"t": t, "robustness": r, "non_markovianity": i, "variant": variant}
        for t, r, i in zip(traj.times, traj.robustness, traj.non_markovianity)
    ]


TRAJECTORY_COLUMNS = ("t", "robustness", "non_markovianity", "variant")
