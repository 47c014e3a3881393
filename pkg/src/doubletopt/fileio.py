"""Readers and writers for the on-disk formats.

Geometry and result features are GeoJSON FeatureCollections carrying a
top-level ``format_version``. Tables are comma-separated with leading
``# key=value`` comment lines (the first is always ``format_version``).
Rates on disk are l/s with three decimals; everything in memory is SI.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import astuple, fields
from pathlib import Path

import numpy as np
import shapely
from shapely.geometry import shape
from shapely.ops import unary_union

from .errors import CrsError, DoubletOptError, IoError, ParseError, ValidationError
from .field import COLUMNS, GroundwaterField
from .geometry import BlockGeometry, PreparedBlock
from .scenarios import OK, BlockRecord, ScenarioReport, ScenarioRun
from .units import to_lps

FORMAT_VERSION = 1

BLOCK_COLUMNS = (
    "block_id",
    "status",
    "n_wells",
    "n_lines",
    "spacing_m",
    "n_doublet",
    "q_block_lps",
    "proven_optimal",
    "gap",
    "node_count",
    "error",
)
REPORT_COLUMNS = tuple(f.name for f in fields(ScenarioReport))


def scenario_tag(q_min_lps: float, r_delta: float) -> str:
    return f"q{q_min_lps:g}_r{r_delta:g}"


# ---------------------------------------------------------------- inputs


def _looks_geographic(coords: np.ndarray) -> bool:
    return bool(len(coords)) and bool(
        np.all(np.abs(coords[:, 0]) <= 180.0) and np.all(np.abs(coords[:, 1]) <= 90.0)
    )


def read_geometry(path) -> list[BlockGeometry]:
    """Blocks and buildings from a GeoJSON FeatureCollection.

    Each feature needs ``properties.role`` in {block, building}; blocks also
    need ``properties.block_id``. Block features sharing an id are merged. A
    building is attached to every block it overlaps with positive area.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")

    block_parts: dict[str, list] = {}
    buildings = []
    all_coords = []
    for n, feat in enumerate(doc.get("features", [])):
        where = f"{path}: feature {n}"
        props = (feat or {}).get("properties") or {}
        role = props.get("role")
        if role not in ("block", "building"):
            raise ParseError(f"{where}: role must be 'block' or 'building', got {role!r}")
        try:
            geom = shape(feat["geometry"])
        except Exception as exc:
            raise ParseError(f"{where}: bad geometry ({exc})") from None
        if geom.geom_type not in ("Polygon", "MultiPolygon"):
            raise ParseError(f"{where}: expected a polygon, got {geom.geom_type}")
        all_coords.append(shapely.get_coordinates(geom))
        if role == "block":
            bid = props.get("block_id")
            if bid is None or str(bid) == "":
                raise ParseError(f"{where}: block feature is missing block_id")
            block_parts.setdefault(str(bid), []).append(geom)
        else:
            buildings.extend(getattr(geom, "geoms", [geom]))

    if all_coords and _looks_geographic(np.vstack(all_coords)):
        raise CrsError(f"{path}: coordinates look geographic; reproject to a metric CRS first")

    blocks = []
    for bid in sorted(block_parts):
        parts = block_parts[bid]
        boundary = parts[0] if len(parts) == 1 else unary_union(parts)
        attached = [
            b for b in buildings if boundary.intersects(b) and boundary.intersection(b).area > 0
        ]
        try:
            blocks.append(BlockGeometry(bid, boundary, attached))
        except DoubletOptError as exc:
            raise ParseError(f"{path}: block {bid}: {exc}") from None
    return blocks


def _table_lines(path):
    """(meta, data lines) of a commented CSV file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    meta = {}
    body = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if value:
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append((lineno, line))
    return meta, body


def read_field(path, max_distance: float | None = None) -> GroundwaterField:
    """Groundwater samples from a CSV with columns
    x, y, K, B, h_n, h_max, grad_h, [v_D], flow_azimuth_deg."""
    _, body = _table_lines(path)
    if not body:
        raise ParseError(f"{path}: empty field file")
    rows = list(csv.reader([line for _, line in body]))
    header = [h.strip() for h in rows[0]]
    required = ("x", "y", "K", "B", "h_n", "h_max", "grad_h", "flow_azimuth_deg")
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"{path}: missing columns {missing}")
    pos = {name: header.index(name) for name in header}
    xy, values = [], []
    for (lineno, _), row in zip(body[1:], rows[1:]):
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            rec = {name: float(row[i]) if row[i].strip() else math.nan for name, i in pos.items()}
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        for name in required:
            if math.isnan(rec[name]):
                raise ValidationError(f"{path}:{lineno}: {name} is required")
        xy.append((rec["x"], rec["y"]))
        values.append([rec.get(c, math.nan) for c in COLUMNS])
        try:
            GroundwaterField(np.array([xy[-1]]), np.array([values[-1]]))
        except ValidationError as exc:
            msg = str(exc).removeprefix("row 0: ")
            raise ValidationError(f"{path}:{lineno}: {msg}") from None
    if not xy:
        raise ParseError(f"{path}: no data rows")
    return GroundwaterField(np.array(xy), np.array(values), max_distance=max_distance)


def write_field(field_: GroundwaterField, path) -> None:
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", *COLUMNS])
    for (x, y), vals in zip(field_.xy, field_.values):
        w.writerow([repr(float(x)), repr(float(y))] + ["" if math.isnan(v) else repr(float(v)) for v in vals])
    Path(path).write_text(buf.getvalue())


def _polygon_coords(poly):
    rings = [poly.exterior, *poly.interiors]
    return [[[float(x), float(y)] for x, y in ring.coords] for ring in rings]


def write_geometry(blocks: list[BlockGeometry], path) -> None:
    feats = []
    for g in blocks:
        parts = getattr(g.boundary, "geoms", [g.boundary])
        for part in parts:
            feats.append(_feature("Polygon", _polygon_coords(part), {"role": "block", "block_id": g.block_id}))
        for b in g.buildings:
            feats.append(_feature("Polygon", _polygon_coords(b), {"role": "building", "block_id": g.block_id}))
    _write_collection(feats, path)


# ---------------------------------------------------------------- outputs


def _feature(kind, coords, props):
    return {"type": "Feature", "geometry": {"type": kind, "coordinates": coords}, "properties": props}


def _write_collection(features, path) -> None:
    doc = {"type": "FeatureCollection", "format_version": FORMAT_VERSION, "features": features}
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n")


def _read_collection(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    return doc["features"]


def _lps(q: float) -> float:
    return round(to_lps(q), 3)


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _write_table(path, meta: dict, header, rows) -> None:
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION}\n")
    for k, v in meta.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def read_table(path) -> tuple[dict, list[dict]]:
    meta, body = _table_lines(path)
    if meta.get("format_version") != str(FORMAT_VERSION):
        raise ParseError(f"{path}: unsupported format_version {meta.get('format_version')!r}")
    rows = list(csv.DictReader([line for _, line in body]))
    return meta, rows


def write_candidates(prepared: list[tuple[str, PreparedBlock | None, str]], path) -> None:
    """Candidate wells (before optimisation) as GeoJSON points."""
    feats = []
    for bid, pb, _ in prepared:
        if pb is None:
            continue
        for line in pb.lines:
            for w in line.wells:
                feats.append(
                    _feature(
                        "Point",
                        [w.x, w.y],
                        {
                            "block_id": bid,
                            "line_id": line.line_id,
                            "well_id": w.well_id,
                            "spacing_m": pb.spacing,
                            "q_d_lps": _lps(w.limits.q_d),
                            "q_f_lps": _lps(w.limits.q_f),
                            "alpha_m2s": float(f"{w.limits.alpha:.6e}"),
                        },
                    )
                )
    _write_collection(feats, path)


def _well_lookup(pb: PreparedBlock):
    return {w.well_id: w for line in pb.lines for w in line.wells}


def write_results(runs: list[ScenarioRun], out_dir, *, timings: bool = False) -> None:
    """Per-scenario wells, doublets and block tables plus one report table."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"{out}: {exc}") from None
    report_rows = []
    for run in runs:
        sc = run.scenario
        tag = scenario_tag(to_lps(sc.q_min), sc.r_delta)
        meta = {"q_min_lps": f"{to_lps(sc.q_min):g}", "r_delta": f"{sc.r_delta:g}", "delta_min": f"{sc.delta_min:g}"}
        wells, doublets, rows, times = [], [], [], []
        for o in run.outcomes:
            sol = o.solution
            rates = o.rates_lps()
            rows.append(
                [
                    o.block_id,
                    o.status,
                    o.n_wells,
                    o.n_lines,
                    "" if o.prepared is None else f"{o.prepared.spacing:g}",
                    len(rates),
                    _fmt(math.fsum(rates)),
                    "" if sol is None else int(sol.proven_optimal),
                    "" if sol is None else f"{sol.gap:.3e}",
                    "" if sol is None else sol.node_count,
                    o.error,
                ]
            )
            if sol is not None:
                times.append([o.block_id, f"{sol.solve_time:.6f}"])
            if sol is None or o.status != OK:
                continue
            lookup = _well_lookup(o.prepared)
            for d, q in zip(sol.installed, rates):
                ext, inj = lookup[d.ext_well_id], lookup[d.inj_well_id]
                for role, w in (("ext", ext), ("inj", inj)):
                    wells.append(
                        _feature(
                            "Point",
                            [w.x, w.y],
                            {"block_id": o.block_id, "line_id": d.line_id, "well_id": w.well_id, "role": role, "q_lps": q},
                        )
                    )
                doublets.append(
                    _feature(
                        "LineString",
                        [[ext.x, ext.y], [inj.x, inj.y]],
                        {
                            "block_id": o.block_id,
                            "line_id": d.line_id,
                            "ext_well_id": ext.well_id,
                            "inj_well_id": inj.well_id,
                            "q_lps": q,
                            "distance_m": round(math.hypot(inj.x - ext.x, inj.y - ext.y), 3),
                        },
                    )
                )
        try:
            _write_collection(wells, out / f"wells_{tag}.geojson")
            _write_collection(doublets, out / f"doublets_{tag}.geojson")
            _write_table(out / f"blocks_{tag}.csv", meta, BLOCK_COLUMNS, rows)
            if timings:
                _write_table(out / f"timings_{tag}.csv", meta, ("block_id", "solve_time_s"), times)
        except OSError as exc:
            raise IoError(str(exc)) from None
        report_rows.append(run.report)
    write_report(report_rows, out / "report.csv")


def format_report_row(r: ScenarioReport):
    out = []
    for f, v in zip(REPORT_COLUMNS, astuple(r)):
        if isinstance(v, int):
            out.append(str(v))
        elif f in ("q_min_lps", "r_delta"):
            out.append(f"{v:g}")
        else:
            out.append(_fmt(v))
    return out


def write_report(reports: list[ScenarioReport], path) -> None:
    try:
        _write_table(path, {}, REPORT_COLUMNS, [format_report_row(r) for r in reports])
    except OSError as exc:
        raise IoError(str(exc)) from None


def read_report(path) -> list[ScenarioReport]:
    _, rows = read_table(path)
    out = []
    for row in rows:
        vals = {}
        for f in fields(ScenarioReport):
            raw = row[f.name]
            vals[f.name] = int(raw) if f.type in ("int", int) else float(raw)
        out.append(ScenarioReport(**vals))
    return out


def read_features(path) -> list[dict]:
    """Flattened features: properties plus ``coordinates``."""
    out = []
    for feat in _read_collection(path):
        rec = dict(feat["properties"])
        rec["coordinates"] = feat["geometry"]["coordinates"]
        out.append(rec)
    return out


def read_block_records(blocks_csv, doublets_geojson) -> tuple[dict, list[BlockRecord]]:
    """Rebuild aggregation inputs from a block table and its doublet features."""
    meta, rows = read_table(blocks_csv)
    rates: dict[str, list[float]] = {}
    for d in read_features(doublets_geojson):
        rates.setdefault(str(d["block_id"]), []).append(float(d["q_lps"]))
    records = []
    for row in rows:
        bid = row["block_id"]
        block_rates = tuple(rates.get(bid, ()))
        if row["status"] == OK and len(block_rates) != int(row["n_doublet"]):
            raise ValidationError(f"{blocks_csv}: block {bid} lists {row['n_doublet']} doublets, features have {len(block_rates)}")
        records.append(BlockRecord(bid, row["status"], int(row["n_lines"]), block_rates))
    return meta, records
