"""
Command-line front end.

    qinterp plan     --config plan.cfg --out pulses.csv
    qinterp simulate --config sweep.cfg --format json
    qinterp certify  --config cert.cfg
    qinterp qvalue   --config q.cfg

A config is a flat ``key = value`` file (TOML-like; ``[sections]`` and
``#`` comments are ignored). Quantities carry their unit in the key name,
e.g. ``delta_tau_ns`` or ``larmor_hz``, and are converted to SI seconds and
rad/s on load. Every output embeds the SHA-256 of the parsed config, and no
timestamps, so identical configs give byte-identical files.

Exit codes: 0 success, 2 config error, 3 model error.
"""
import argparse
import csv
import hashlib
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import filters, planner, reference, spin
from .errors import EnumerationRefusedError, InvalidFractionError, ModelError

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_MODEL = 0, 2, 3


class ConfigError(ValueError):
    """Malformed, missing or inconsistent configuration."""


# -- config -----------------------------------------------------------------

def parse_config_text(text):
    """Parse ``key = value`` lines into a dict of raw strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc


def config_hash(command, cfg):
    canon = json.dumps({"command": command, "config": dict(sorted(cfg.items()))},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


_SCALE = {"_s": 1.0, "_ms": 1e-3, "_us": 1e-6, "_ns": 1e-9, "_ps": 1e-12,
          "_hz": 1.0, "_khz": 1e3, "_mhz": 1e6, "_ghz": 1e9}


class Params:
    """Typed, unit-aware access to a raw config; tracks unused keys."""

    def __init__(self, cfg):
        self.cfg = dict(cfg)
        self.used = set()

    def _raw(self, key, default, required):
        if key in self.cfg:
            self.used.add(key)
            return self.cfg[key]
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default

    def has(self, *keys):
        return any(k in self.cfg for k in keys)

    def str(self, key, default=None, required=False, choices=None):
        val = self._raw(key, default, required)
        if val is not None and choices is not None and str(val).upper() not in choices:
            raise ConfigError(f"{key} must be one of {sorted(choices)}, got {val!r}")
        return None if val is None else str(val)

    def float(self, key, default=None, required=False, positive=False):
        val = self._raw(key, default, required)
        if val is None:
            return None
        try:
            out = float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number, got {val!r}") from None
        if not np.isfinite(out) or (positive and out <= 0):
            raise ConfigError(f"{key} must be a {'positive ' if positive else ''}finite number, got {val!r}")
        return out

    def int(self, key, default=None, required=False, minimum=None):
        val = self._raw(key, default, required)
        if val is None:
            return None
        try:
            out = int(str(val))
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {val!r}") from None
        if minimum is not None and out < minimum:
            raise ConfigError(f"{key} must be >= {minimum}, got {out}")
        return out

    def bool(self, key, default=False):
        val = self._raw(key, None, False)
        if val is None:
            return default
        low = str(val).lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {val!r}")

    def floats(self, key, default=None, required=False):
        val = self._raw(key, default, required)
        if val is None:
            return None
        text = str(val).strip().strip("[]")
        try:
            return [float(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{key} must be a comma-separated list of numbers") from None

    def quantity(self, stem, kind, default=None, required=False, positive=True):
        """Read ``stem_<unit>`` and return SI (seconds or Hz)."""
        units = ("_s", "_ms", "_us", "_ns", "_ps") if kind == "time" else ("_hz", "_khz", "_mhz", "_ghz")
        found = [stem + u for u in units if stem + u in self.cfg]
        if len(found) > 1:
            raise ConfigError(f"{stem} given more than once: {found}")
        if not found:
            if required:
                raise ConfigError(f"missing required key {stem}{units[0]} (or another unit suffix)")
            return default
        key = found[0]
        return self.float(key, positive=positive) * _SCALE[key[len(stem):]]

    def fraction(self, key, required=True):
        val = self._raw(key, None, required)
        try:
            return planner.as_fraction(Fraction(str(val)))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{key} must be a fraction like 3/8, got {val!r}") from None

    def check_unused(self):
        extra = sorted(set(self.cfg) - self.used)
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(extra)}")


def _family(p, default="CPMG", choices=None):
    return p.str("family", default, choices=set(choices or spin.FAMILIES)).upper()


def _coupling(p):
    """SpinCoupling from ``larmor_hz`` plus either ``tilt_rad`` or A/B/C in Hz."""
    wl = 2 * np.pi * p.quantity("larmor", "freq", required=True)
    if p.has("tilt_rad"):
        if p.has("A_hz", "B_hz", "C_hz"):
            raise ConfigError("give either tilt_rad or A_hz/B_hz/C_hz, not both")
        return spin.SpinCoupling.from_tilt(wl, p.float("tilt_rad", required=True))
    return spin.SpinCoupling(wl, *(2 * np.pi * p.quantity(s, "freq", 0.0, positive=False)
                                   for s in ("A", "B", "C")))


def _eta(p):
    eta = p.str("eta", "exact")
    if eta == "exact":
        return None
    try:
        return float(eta)
    except ValueError:
        raise ConfigError(f"eta must be 'exact' or a number, got {eta!r}") from None


# -- output -----------------------------------------------------------------

def _num(x):
    """Shortest exact text for a float; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def render(doc, fmt):
    """Serialize ``{'meta': {...}, 'columns': [...], 'rows': [...]}``."""
    if fmt == "json":
        body = {"schema": SCHEMA, **_jsonable(doc["meta"]),
                "columns": doc["columns"], "rows": _jsonable(doc["rows"])}
        for key, val in doc.get("extra", {}).items():
            body[key] = _jsonable(val)
        return json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA}\n")
    for key in sorted(doc["meta"]):
        buf.write(f"# {key}: {_num(doc['meta'][key])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(doc["columns"])
    for row in doc["rows"]:
        writer.writerow([_num(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def read_csv_output(path):
    """Parse a CSV written by this tool into ``(meta, columns, rows)``."""
    meta, lines = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                meta[key] = value
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    return meta, columns, [row for row in reader]


# -- commands ---------------------------------------------------------------

def pulse_rows(plan, grid, family):
    """(index, centre time in ns, phase) for every pi pulse of the plan."""
    tf = filters.filter_from_plan(plan, grid, family)
    phases = spin.FAMILIES[family][1]
    return [(i, f"{t * 1e9:.3f}", phases[i % len(phases)]) for i, t in enumerate(tf.switch_times)]


def validate_pulse_table(rows, family):
    """Check increasing times and the family phase pattern; return True or raise."""
    phases = spin.FAMILIES[family.upper()][1]
    times = [float(r[1]) for r in rows]
    if any(b <= a for a, b in zip(times[:-1], times[1:])):
        raise ValueError("pulse centre times are not strictly increasing")
    for i, r in enumerate(rows):
        if r[2] != phases[i % len(phases)]:
            raise ValueError(f"pulse {i} has phase {r[2]!r}, expected {phases[i % len(phases)]!r}")
    return True


def cmd_plan(p, out_log):
    family = _family(p)
    n_cycles = p.int("n_cycles", required=True, minimum=1)
    n_blocks = spin.FAMILIES[family][0] * n_cycles
    frac = p.fraction("fraction")
    dtau = p.quantity("delta_tau", "time", required=True)
    tau_k = p.quantity("tau_k", "time", required=True)
    k = tau_k / dtau
    if abs(k - round(k)) > 1e-9 * max(1.0, k) or round(k) < 1:
        raise ConfigError(f"tau_k must be a positive multiple of delta_tau (got ratio {k!r})")
    grid = planner.HardwareGrid(dtau, int(round(k)), p.float("delta0_rad", 0.0))
    plan = planner.optimal_plan(frac, n_blocks)
    coupling = _coupling(p) if p.has("larmor_hz", "larmor_khz", "larmor_mhz", "larmor_ghz") else None
    eta = _eta(p)
    p.check_unused()

    err = planner.trapezium_error(plan, grid)
    tf = filters.filter_from_plan(plan, grid, family)
    meta = {"command": "plan", "family": family, "n_cycles": n_cycles, "n_blocks": n_blocks,
            "fraction": str(frac), "p": plan.p, "q": plan.q, "word": plan.to_string(),
            "delta_tau_s": dtau, "tau_k_s": grid.tau_k, "k": grid.k, "delta0_rad": grid.delta0,
            "total_time_ns": f"{tf.total_time * 1e9:.3f}", "trapezium_error_s": err}
    out_log.write(f"trapezium error: {err!r} s\n")
    if coupling is not None:
        fid = planner.plan_fidelity(plan, grid, coupling, eta)
        meta["predicted_fidelity"] = fid
        out_log.write(f"predicted fidelity: {fid!r}\n")
    return {"meta": meta, "columns": ["pulse_index", "center_time_ns", "phase"],
            "rows": pulse_rows(plan, grid, family)}


def _plan_from_file(path):
    meta, columns, rows = read_csv_output(path)
    if meta.get("command") != "plan":
        raise ConfigError(f"{path} is not a plan table")
    try:
        plan = planner.InterpolationPlan.from_string(meta["word"])
        grid = planner.HardwareGrid(float(meta["delta_tau_s"]), int(meta["k"]),
                                    float(meta["delta0_rad"]))
        family = meta["family"]
        validate_pulse_table(rows, family)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed plan table ({exc})") from exc
    return plan, grid, family


def _sweep_axis(p, stem, required=True):
    lo = p.float(f"{stem}_min", required=required)
    hi = p.float(f"{stem}_max", required=required)
    n = p.int("n_points", 101, minimum=2)
    if lo is None:
        return None
    if not hi > lo:
        raise ConfigError(f"{stem}_max must exceed {stem}_min")
    return np.linspace(lo, hi, n)


def _spin_sweep(p, coupling, family):
    n_cycles = p.int("n_cycles", required=True, minimum=1)
    n_blocks = spin.FAMILIES[family][0] * n_cycles
    eta = _eta(p)
    meta = {"family": family, "n_cycles": n_cycles, "n_blocks": n_blocks,
            "tilt_rad": coupling.tilt, "eta": coupling.eta if eta is None else eta,
            "omega_L_rad_s": coupling.omega_L}
    if p.has("delta_tau_ns", "delta_tau_ps", "delta_tau_us", "delta_tau_s"):
        dtau = p.quantity("delta_tau", "time", required=True)
        t0 = p.quantity("tau_start", "time", required=True)
        t1 = p.quantity("tau_stop", "time", required=True)
        p.check_unused()
        taus, sig, words = planner.supersampled_sweep(coupling, t0, t1, dtau, n_blocks, eta)
        meta.update({"sweep": "tau", "delta_tau_s": dtau,
                     "effective_sampling_s": dtau / n_blocks})
        rows = [(float(t) * 1e9, float(s), w) for t, s, w in zip(taus, sig, words)]
        return meta, ["tau_ns", "signal", "word"], rows
    deltas = _sweep_axis(p, "delta")
    p.check_unused()
    sig = spin.signal_at_deviation(coupling, deltas, n_blocks, eta)
    meta["sweep"] = "delta"
    return meta, ["delta_rad", "signal"], [(float(d), float(s)) for d, s in zip(deltas, sig)]


def _ac_sweep(p):
    spectrum_file = p.str("spectrum_file")
    if spectrum_file:
        try:
            ns = filters.NoiseSpectrum.load(spectrum_file)
        except OSError as exc:
            raise ConfigError(f"cannot read spectrum {spectrum_file}: {exc}") from exc
    else:
        freqs = p.floats("tones_hz", required=True)
        amps = p.floats("amplitudes", [1.0] * len(freqs))
        widths = p.floats("fwhm_hz", [0.0] * len(freqs))
        try:
            ns = filters.NoiseSpectrum.tones(freqs, amps, widths)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    n_pulses = p.int("n_pulses", required=True, minimum=2)
    if n_pulses % 2:
        raise ConfigError("n_pulses must be even (two pulses per block)")
    b = p.float("coupling_b", 1.0)
    t_lo = p.quantity("spacing_start", "time", required=True)
    t_hi = p.quantity("spacing_stop", "time", required=True)
    if not t_hi > t_lo:
        raise ConfigError("spacing_stop must exceed spacing_start")
    meta = {"n_pulses": n_pulses, "coupling_b": b}
    if p.has("delta_tau_ns", "delta_tau_ps", "delta_tau_us", "delta_tau_s"):
        dtau = p.quantity("delta_tau", "time", required=True)
        p.check_unused()
        taus, sig = filters.interpolated_ac_sweep(t_lo / 2, t_hi / 2, n_pulses // 2, dtau, ns, b)
        spacings = 2 * taus
        meta.update({"sweep": "interpolated", "delta_tau_s": dtau,
                     "effective_sampling_s": dtau / (n_pulses // 2)})
    else:
        n = p.int("n_points", 401, minimum=3)
        p.check_unused()
        spacings = np.linspace(t_lo, t_hi, n)
        sig = filters.ac_sweep(spacings, n_pulses, ns, b)
        meta["sweep"] = "ideal"
    minima = filters.significant_minima(sig)
    meta.update({"resolved": filters.is_resolved(sig), "n_minima": len(minima),
                 "minima_ns": ";".join(repr(float(spacings[i]) * 1e9) for i in minima)})
    rows = [(float(s * 1e9), float(v)) for s, v in zip(spacings, sig)]
    return meta, ["spacing_ns", "signal"], rows


def cmd_simulate(p, out_log):
    model = p.str("model", required=True, choices={"SPIN", "NITROGEN", "AC", "PLAN"}).lower()
    if model == "spin":
        coupling = _coupling(p)
        meta, cols, rows = _spin_sweep(p, coupling, _family(p))
    elif model == "nitrogen":
        m = spin.Nitrogen14Model(p.float("bz_gauss", required=True), p.float("bperp_gauss", required=True))
        meta, cols, rows = _spin_sweep(p, m.coupling(), _family(p, "XY8", {"XY8"}))
        meta.update({"bz_gauss": m.Bz, "bperp_gauss": m.Bperp})
    elif model == "plan":
        plan, grid, family = _plan_from_file(p.str("plan_file", required=True))
        coupling = _coupling(p)
        eta = _eta(p)
        offsets = _sweep_axis(p, "delta0")
        p.check_unused()
        sig = [planner.interpolated_signal(plan, grid.with_offset(d), coupling, eta) for d in offsets]
        meta = {"family": family, "word": plan.to_string(), "delta_tau_s": grid.delta_tau,
                "k": grid.k, "sweep": "delta0"}
        cols, rows = ["delta0_rad", "signal"], [(float(d), float(s)) for d, s in zip(offsets, sig)]
    else:
        meta, cols, rows = _ac_sweep(p)
    meta = {"command": "simulate", "model": model, **meta}
    out_log.write(f"simulated {len(rows)} points\n")
    return {"meta": meta, "columns": cols, "rows": rows}


def certify(n_blocks, grid, coupling, n_offsets=9, eta=None):
    """Brute-force every fraction j/N; return per-fraction verdicts and tables."""
    verdicts, tables = [], {}
    for j in range(n_blocks + 1):
        frac = Fraction(j, n_blocks)
        plan = planner.optimal_plan(frac, n_blocks)
        best, table = planner.brute_force_best_plan(frac, n_blocks, grid, coupling, n_offsets, eta=eta)
        best_words = [b.to_string() for b in best]
        word = plan.to_string()
        if word in best_words:
            verdict = "matched" if len(best_words) == 1 else "tied"
        else:
            verdict = "mismatched"
        verdicts.append({"fraction": str(frac), "word": word, "verdict": verdict,
                         "n_words": len(table), "n_best": len(best_words),
                         "best_infidelity": min(table.values()),
                         "plan_infidelity": table[word]})
        tables[str(frac)] = table
    return verdicts, tables


def cmd_certify(p, out_log):
    n_blocks = p.int("n_blocks", required=True, minimum=1)
    coupling = _coupling(p) if p.has("larmor_hz", "larmor_mhz", "larmor_khz", "larmor_ghz") else \
        spin.SpinCoupling.from_tilt(1.0, p.float("tilt_rad", required=True))
    dtheta = p.float("dtheta_rad", required=True, positive=True)
    k = p.int("k", required=True, minimum=1)
    grid = planner.HardwareGrid.from_angle(dtheta, k, coupling.omega_L, p.float("delta0_rad", 0.0))
    n_offsets = p.int("n_offsets", 9, minimum=1)
    eta = _eta(p)
    only = p.str("fraction")
    p.check_unused()
    if n_blocks > planner.MAX_BRUTE_FORCE_BLOCKS:
        raise EnumerationRefusedError(
            f"refusing to enumerate {n_blocks} blocks (limit {planner.MAX_BRUTE_FORCE_BLOCKS})")
    if only is not None:
        frac = planner.as_fraction(Fraction(only))
        best, table = planner.brute_force_best_plan(frac, n_blocks, grid, coupling, n_offsets, eta=eta)
        word = planner.optimal_plan(frac, n_blocks).to_string()
        bw = [b.to_string() for b in best]
        verdict = ("matched" if len(bw) == 1 else "tied") if word in bw else "mismatched"
        verdicts = [{"fraction": str(frac), "word": word, "verdict": verdict, "n_words": len(table),
                     "n_best": len(bw), "best_infidelity": min(table.values()),
                     "plan_infidelity": table[word]}]
        tables = {str(frac): table}
    else:
        verdicts, tables = certify(n_blocks, grid, coupling, n_offsets, eta)
    for v in verdicts:
        out_log.write(f"{v['fraction']}: {v['verdict']} ({v['n_words']} words)\n")
    meta = {"command": "certify", "n_blocks": n_blocks, "dtheta_rad": dtheta, "k": k,
            "delta0_rad": grid.delta0, "tilt_rad": coupling.tilt, "n_offsets": n_offsets,
            "all_certified": all(v["verdict"] != "mismatched" for v in verdicts)}
    rows = []
    for v in verdicts:
        for word, score in sorted(tables[v["fraction"]].items()):
            rows.append((v["fraction"], word, score, word == v["word"], v["verdict"]))
    return {"meta": meta, "columns": ["fraction", "word", "mean_infidelity", "is_plan", "verdict"],
            "rows": rows, "extra": {"verdicts": verdicts}}


def cmd_qvalue(p, out_log):
    f = p.quantity("f", "freq", required=True)
    dtau = p.quantity("delta_tau", "time", required=True)
    T2 = p.quantity("t2", "time", required=True)
    larmor = p.quantity("larmor", "freq", f)
    alpha = p.float("tilt_rad", 0.0)
    with_ref = p.bool("reference", False)
    p.check_unused()
    rep = filters.q_metrics(f, dtau, T2, 2 * np.pi * larmor, alpha)
    out_log.write(f"Q bare {rep.q_bare!r}, supersampled {rep.q_supersample!r}\n")
    meta = {"command": "qvalue", **rep.as_dict(), "delta_tau_s": dtau, "t2_s": T2,
            "larmor_hz": larmor, "tilt_rad": alpha}
    rows = [(key, val) for key, val in rep.as_dict().items()]
    doc = {"meta": meta, "columns": ["quantity", "value"], "rows": rows}
    if with_ref:
        ref = reference.instrument_rows()
        doc["extra"] = {"instruments": ref, "sources": reference.source_rows()}
        doc["rows"] = rows + [(f"q_bare[{r['instrument']}]", r["q_bare_computed"]) for r in ref]
    return doc


COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "certify": cmd_certify, "qvalue": cmd_qvalue}
DEFAULT_FORMAT = {"plan": "csv", "simulate": "csv", "certify": "csv", "qvalue": "json"}


def build_parser():
    ap = argparse.ArgumentParser(prog="qinterp", description="Quantum-interpolation sequence planner and simulator.")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {"plan": "write the optimal pulse table for one supersample",
             "simulate": "run a signal sweep (spin, nitrogen, ac or plan model)",
             "certify": "brute-force check of the optimal plans (N <= 12)",
             "qvalue": "Q-value report"}
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="key = value config file")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--format", choices=("csv", "json"), help="output format")
        sp.add_argument("--seed", type=int, help="reserved; every computation is deterministic")
    return ap


def run(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    fmt = args.format or DEFAULT_FORMAT[args.command]
    try:
        cfg = load_config(args.config)
        params = Params(cfg)
        # diagnostics share stdout only when the payload goes to a file
        log = stdout if args.out else stderr
        doc = COMMANDS[args.command](params, log)
        doc["meta"]["config_sha256"] = config_hash(args.command, cfg)
        text = render(doc, fmt)
    except (ConfigError, InvalidFractionError, EnumerationRefusedError) as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except ModelError as exc:
        stderr.write(f"model error: {exc}\n")
        return EXIT_MODEL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
