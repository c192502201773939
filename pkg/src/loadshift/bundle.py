"""Fleet bundle IO: a manifest JSON plus per-household CSV files.

Layout under a bundle directory::

    manifest.json                      roles, days, mode, household index
    pricing.csv                        slot,price,is_peak (48 rows)
    households/<id>/appliances.csv     one appliance per row
    households/<id>/history.csv        date,slot,value_kw (48 rows per date)
    households/<id>/pv_history.csv     same layout, PV generation (optional)

Single curves use ``slot,value_kw``.  Floats are written with ``repr`` so a
save/load round trip is bit-exact.  Every parse failure raises a
:class:`FormatError` citing the file and line.  The appliance table carries
the scalar ``max_shift`` cap; richer per-slot shift preferences exist only
in the API.
"""

from __future__ import annotations

import csv
import datetime
import json
from pathlib import Path

import numpy as np

from .core import (
    SLOT_COUNT,
    ApplianceSpec,
    DailyRecord,
    Household,
    LoadCurve,
    PricingSignal,
    PvSystem,
    uniform_shift,
)
from .errors import FormatError, LoadshiftError
from .simulate import FleetConfig

BUNDLE_FORMAT_VERSION = 1

CURVE_COLUMNS = ("slot", "value_kw")
HISTORY_COLUMNS = ("date", "slot", "value_kw")
PRICING_COLUMNS = ("slot", "price", "is_peak")
APPLIANCE_COLUMNS = (
    "id",
    "kind",
    "duration_slots",
    "window_start",
    "window_end",
    "preferred_start",
    "max_shift",
    "power_csv",
    "count",
)


def _fail(path, line: int | None, message: str):
    place = f"{path}:{line}" if line is not None else str(path)
    raise FormatError(f"{place}: {message}")


def _open_rows(path, expected_columns):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: cannot read: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        _fail(path, 1, "empty file")
    if tuple(rows[0]) != tuple(expected_columns):
        _fail(path, 1, f"expected columns {','.join(expected_columns)}, got {','.join(rows[0])}")
    return rows[1:]


def _parse_float(text, path, line, column) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        _fail(path, line, f"non-numeric {column}: {text!r}")


def _parse_int(text, path, line, column) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        _fail(path, line, f"non-integer {column}: {text!r}")


# ---------------------------------------------------------------- curves


def write_curve_csv(curve: LoadCurve, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for idx, value in enumerate(curve.values, start=1):
            writer.writerow([idx, repr(float(value))])
    return path


def read_curve_csv(path) -> LoadCurve:
    rows = _open_rows(path, CURVE_COLUMNS)
    if len(rows) != SLOT_COUNT:
        _fail(path, len(rows) + 1, f"curve has {len(rows)} rows, expected {SLOT_COUNT}")
    values = np.empty(SLOT_COUNT)
    for line, row in enumerate(rows, start=2):
        if len(row) != 2:
            _fail(path, line, f"expected 2 fields, got {len(row)}")
        slot = _parse_int(row[0], path, line, "slot")
        if slot != line - 1:
            _fail(path, line, f"expected slot {line - 1}, got {slot}")
        values[slot - 1] = _parse_float(row[1], path, line, "value_kw")
    try:
        return LoadCurve(values)
    except LoadshiftError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------- history


def write_history_csv(records, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HISTORY_COLUMNS)
        for record in records:
            day = record.day.isoformat()
            for idx, value in enumerate(record.curve.values, start=1):
                writer.writerow([day, idx, repr(float(value))])
    return path


def read_history_csv(path) -> tuple[DailyRecord, ...]:
    rows = _open_rows(path, HISTORY_COLUMNS)
    records = []
    current_day = None
    values = []
    day_line = 2

    def flush(line):
        if current_day is None:
            return
        if len(values) != SLOT_COUNT:
            _fail(path, line, f"day {current_day} has {len(values)} slots, expected {SLOT_COUNT}")
        try:
            records.append(DailyRecord(day=current_day, curve=LoadCurve(np.array(values))))
        except LoadshiftError as exc:
            raise FormatError(f"{path}: day {current_day}: {exc}") from exc

    for line, row in enumerate(rows, start=2):
        if len(row) != 3:
            _fail(path, line, f"expected 3 fields, got {len(row)}")
        try:
            day = datetime.date.fromisoformat(row[0])
        except ValueError:
            _fail(path, line, f"bad date: {row[0]!r}")
        slot = _parse_int(row[1], path, line, "slot")
        value = _parse_float(row[2], path, line, "value_kw")
        if day != current_day:
            flush(line)
            if current_day is not None and day <= current_day:
                _fail(path, line, f"days out of order: {current_day} then {day}")
            current_day = day
            values = []
            day_line = line
        if slot != len(values) + 1:
            _fail(path, line, f"expected slot {len(values) + 1} for {day}, got {slot}")
        values.append(value)
    flush(day_line + len(values))
    if not records:
        _fail(path, 2, "history holds no days")
    return tuple(records)


# ---------------------------------------------------------------- pricing


def write_pricing_csv(pricing: PricingSignal, path) -> Path:
    path = Path(path)
    mask = pricing.peak_mask()
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PRICING_COLUMNS)
        for idx in range(SLOT_COUNT):
            writer.writerow([idx + 1, repr(float(pricing.prices[idx])), int(mask[idx])])
    return path


def read_pricing_csv(path) -> PricingSignal:
    rows = _open_rows(path, PRICING_COLUMNS)
    if len(rows) != SLOT_COUNT:
        _fail(path, len(rows) + 1, f"pricing has {len(rows)} rows, expected {SLOT_COUNT}")
    prices = np.empty(SLOT_COUNT)
    peak = np.zeros(SLOT_COUNT, dtype=bool)
    for line, row in enumerate(rows, start=2):
        if len(row) != 3:
            _fail(path, line, f"expected 3 fields, got {len(row)}")
        slot = _parse_int(row[0], path, line, "slot")
        if slot != line - 1:
            _fail(path, line, f"expected slot {line - 1}, got {slot}")
        prices[slot - 1] = _parse_float(row[1], path, line, "price")
        flag = row[2].strip()
        if flag not in ("0", "1"):
            _fail(path, line, f"is_peak must be 0 or 1, got {flag!r}")
        peak[slot - 1] = flag == "1"

    windows = []
    idx = 0
    while idx < SLOT_COUNT:
        if peak[idx]:
            start = idx + 1
            while idx < SLOT_COUNT and peak[idx]:
                idx += 1
            windows.append((start, idx))
        else:
            idx += 1
    try:
        return PricingSignal(prices=prices, peak_windows=tuple(windows))
    except LoadshiftError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------- appliances


def write_appliances_csv(appliances, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(APPLIANCE_COLUMNS)
        for spec in appliances:
            writer.writerow(
                [
                    spec.id,
                    spec.kind,
                    spec.duration_slots,
                    spec.window_start,
                    spec.window_end,
                    spec.preferred_start,
                    spec.max_shift,
                    ";".join(repr(float(p)) for p in spec.power_profile),
                    spec.count,
                ]
            )
    return path


def read_appliances_csv(path) -> tuple[ApplianceSpec, ...]:
    rows = _open_rows(path, APPLIANCE_COLUMNS)
    if not rows:
        _fail(path, 2, "households need at least one appliance")
    specs = []
    for line, row in enumerate(rows, start=2):
        if len(row) != len(APPLIANCE_COLUMNS):
            _fail(path, line, f"expected {len(APPLIANCE_COLUMNS)} fields, got {len(row)}")
        name = row[0].strip()
        if not name:
            _fail(path, line, "empty appliance id")
        profile = [
            _parse_float(piece, path, line, "power_csv") for piece in row[7].split(";") if piece
        ]
        try:
            specs.append(
                ApplianceSpec(
                    id=name,
                    kind=row[1].strip(),
                    power_profile=np.array(profile),
                    duration_slots=_parse_int(row[2], path, line, "duration_slots"),
                    window_start=_parse_int(row[3], path, line, "window_start"),
                    window_end=_parse_int(row[4], path, line, "window_end"),
                    preferred_start=_parse_int(row[5], path, line, "preferred_start"),
                    preference_shift=uniform_shift(_parse_int(row[6], path, line, "max_shift")),
                    count=_parse_int(row[8], path, line, "count"),
                )
            )
        except FormatError:
            raise
        except LoadshiftError as exc:
            _fail(path, line, str(exc))
    return tuple(specs)


# ---------------------------------------------------------------- manifest


def _manifest_entry(household: Household) -> dict:
    base = f"households/{household.id}"
    entry = {
        "id": household.id,
        "appliances": f"{base}/appliances.csv",
        "history": f"{base}/history.csv",
        "pv": None,
    }
    if household.pv is not None:
        entry["pv"] = {
            "generation_history": f"{base}/pv_history.csv",
            "battery_capacity": float(household.pv.battery_capacity),
            "battery_soc": float(household.pv.initial_soc),
            "charge_rate": float(household.pv.charge_rate),
            "charge_efficiency": float(household.pv.charge_efficiency),
        }
    return entry


def save_bundle(config: FleetConfig, path) -> Path:
    """Write the fleet as a bundle directory; returns its root."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    write_pricing_csv(config.pricing, root / "pricing.csv")
    for household in config.households:
        base = root / "households" / household.id
        base.mkdir(parents=True, exist_ok=True)
        write_appliances_csv(household.appliances, base / "appliances.csv")
        write_history_csv(household.history, base / "history.csv")
        if household.pv is not None:
            write_history_csv(household.pv.history, base / "pv_history.csv")
    manifest = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "mode": config.mode,
        "days": [day.isoformat() for day in config.days],
        "pricing": "pricing.csv",
        "recipe": config.recipe,
        "households": [_manifest_entry(h) for h in config.households],
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return root


def _load_manifest(root: Path) -> dict:
    path = root / "manifest.json"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: cannot read: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        _fail(path, None, "manifest must be a JSON object")
    for key in ("format_version", "mode", "days", "pricing", "households"):
        if key not in doc:
            _fail(path, None, f"manifest is missing {key!r}")
    if doc["format_version"] != BUNDLE_FORMAT_VERSION:
        _fail(path, None, f"unsupported format_version {doc['format_version']!r}")
    if not isinstance(doc["households"], list) or not doc["households"]:
        _fail(path, None, "manifest lists no households")
    return doc


def _load_household(root: Path, entry, manifest_path) -> Household:
    if not isinstance(entry, dict) or "id" not in entry:
        _fail(manifest_path, None, f"bad household entry: {entry!r}")
    hid = entry["id"]
    for key in ("appliances", "history"):
        if key not in entry:
            _fail(manifest_path, None, f"household {hid}: missing {key!r}")
    appliances = read_appliances_csv(root / entry["appliances"])
    history = read_history_csv(root / entry["history"])

    pv = None
    pv_entry = entry.get("pv")
    if pv_entry is not None:
        for key in ("generation_history", "battery_capacity", "battery_soc",
                    "charge_rate", "charge_efficiency"):
            if key not in pv_entry:
                _fail(manifest_path, None, f"household {hid}: pv missing {key!r}")
        pv_history = read_history_csv(root / pv_entry["generation_history"])
        try:
            pv = PvSystem(
                generation=np.zeros(SLOT_COUNT),
                battery_capacity=pv_entry["battery_capacity"],
                battery_soc=pv_entry["battery_soc"],
                charge_rate=pv_entry["charge_rate"],
                charge_efficiency=pv_entry["charge_efficiency"],
                history=pv_history,
            )
        except LoadshiftError as exc:
            raise FormatError(f"{manifest_path}: household {hid}: {exc}") from exc

    try:
        return Household(id=hid, appliances=appliances, pv=pv, history=history)
    except LoadshiftError as exc:
        raise FormatError(f"{manifest_path}: household {hid}: {exc}") from exc


def load_bundle(path) -> FleetConfig:
    """Read a bundle directory back into a validated fleet.

    Raises:
        FormatError: on the first structural problem, citing file and line.
    """
    root = Path(path)
    manifest_path = root / "manifest.json"
    doc = _load_manifest(root)

    days = []
    for raw in doc["days"]:
        try:
            days.append(datetime.date.fromisoformat(raw))
        except (TypeError, ValueError):
            _fail(manifest_path, None, f"bad day: {raw!r}")

    pricing = read_pricing_csv(root / doc["pricing"])
    households = tuple(
        _load_household(root, entry, manifest_path) for entry in doc["households"]
    )
    return FleetConfig(
        households=households,
        pricing=pricing,
        days=tuple(days),
        mode=doc["mode"],
        recipe=doc.get("recipe"),
    )


def lint_bundle(path) -> tuple[str, ...]:
    """Collect every problem found in a bundle instead of stopping at one."""
    root = Path(path)
    problems = []
    try:
        doc = _load_manifest(root)
    except LoadshiftError as exc:
        return (str(exc),)

    for raw in doc["days"]:
        try:
            datetime.date.fromisoformat(raw)
        except (TypeError, ValueError):
            problems.append(f"{root / 'manifest.json'}: bad day: {raw!r}")
    if not doc["days"]:
        problems.append(f"{root / 'manifest.json'}: no simulation days")

    try:
        read_pricing_csv(root / doc["pricing"])
    except LoadshiftError as exc:
        problems.append(str(exc))

    seen = set()
    for entry in doc["households"]:
        hid = entry.get("id") if isinstance(entry, dict) else None
        if hid in seen:
            problems.append(f"{root / 'manifest.json'}: duplicate household id {hid!r}")
        seen.add(hid)
        try:
            _load_household(root, entry, root / "manifest.json")
        except LoadshiftError as exc:
            problems.append(str(exc))
    return tuple(problems)
