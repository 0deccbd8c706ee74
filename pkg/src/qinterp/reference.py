"""
Published reference values bundled as static records.

Timing instruments and their bare Q for a proton at 0.5 T, and a survey of
signal sources with the Q needed to resolve them. Values are stored as
printed; :func:`instrument_q` recomputes the bare Q column from the timing
resolution.
"""
import math

PROTON_GAMMA_HZ_PER_T = 42.577478e6
REFERENCE_FIELD_T = 0.5

# (instrument, manufacturer, delta_tau [s], rms jitter [s], cost [USD], dtheta label, bare Q)
INSTRUMENTS = (
    ("AWG70001A", "Tektronix", 20e-12, 250e-15, 100_000, "pi/7378", 1174.4),
    ("AWG5002C", "Tektronix", 1.76e-9, 5.0e-12, 32_300, "pi/83", 13.3),
    ("WX1284C", "Tabor", 1e-9, 2.0e-12, 30_000, "pi/147", 23.5),
    ("PulseBlaster ESR-PRO", "SpinCore", 2.0e-9, 100e-15, 5_000, "pi/73", 11.7),
)

# (system, source, f [Hz] or None, delta_f [Hz] or None, Q)
SIGNAL_SOURCES = (
    ("Nanoscale NMR/ESR", "13C spins", 2.5e6, 7.5e3, 333),
    ("Nanoscale NMR/ESR", "Nitroxide radical", 430e6, 20e6, 21.5),
    ("Nanoscale NMR/ESR", "1H spins", 1.06e6, 30e3, 35.3),
    ("Nanoscale NMR/ESR", "13C spin clusters", 2e6, 200.0, 1e4),
    ("Nanoscale NMR/ESR", "NQR of 2H clusters", 1.5e6, 500.0, 3000),
    ("13C chemical shift", "Aldehyde group", 5.35e6, None, 5000),
    ("13C chemical shift", "Aromatic group", 5.35e6, None, 7700),
    ("13C chemical shift", "Alcohol group", 5.35e6, None, 16000),
    ("Spin waves in ferromagnets", "FMR in Permalloy", 5.5e9, 0.3e6, 1.8e4),
    ("Spin waves in ferromagnets", "FMR in YIG", 3e9, 5e6, 600),
    ("Spin waves in ferromagnets", "STOs", 9e9, 450e6, 20),
)


def proton_frequency(field_t=REFERENCE_FIELD_T):
    """Proton Larmor frequency (Hz) at ``field_t`` tesla."""
    return PROTON_GAMMA_HZ_PER_T * field_t


def instrument_q(delta_tau, f=None):
    """Bare Q ``1/(2 f dtau)``; ``f`` defaults to the proton at 0.5 T."""
    f = proton_frequency() if f is None else f
    return 1.0 / (2.0 * f * delta_tau)


def instrument_rows():
    """Instrument records as dicts, with the recomputed bare Q alongside."""
    rows = []
    for name, maker, dt, jitter, cost, dtheta, q in INSTRUMENTS:
        rows.append({"instrument": name, "manufacturer": maker, "delta_tau": dt,
                     "jitter": jitter, "cost_usd": cost, "dtheta": dtheta,
                     "q_bare_published": q, "q_bare_computed": instrument_q(dt)})
    return rows


def source_rows():
    return [{"system": s, "source": src, "f": f, "delta_f": df, "q": q}
            for s, src, f, df, q in SIGNAL_SOURCES]


def significant(x, digits=3):
    """Round ``x`` to ``digits`` significant figures."""
    if x == 0:
        return 0.0
    return round(x, digits - 1 - int(math.floor(math.log10(abs(x)))))
