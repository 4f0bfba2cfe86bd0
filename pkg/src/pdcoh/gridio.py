"""Deterministic on-disk formats for grids, maps, traces, and metrics.

Two encodings share one header model. CSV files open with `# key: value`
lines (values JSON-encoded, so strings and numbers survive the round
trip) followed by comma-separated rows; complex grids store re/im column
pairs. Binary files carry a JSON header after an 8-byte magic and then
raw little-endian arrays in C order. Uniform axes persist as
start/step/count. Anything timestamp-like is dropped on write: the same
inputs must produce the same bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .coherence import CoherenceMap
from .errors import ConfigurationError
from .interferometer import AssembledMap, FringeTrace
from .spectrum import GridSpec, SpectralGrid, WavelengthAngleGrid

_VERSION = 1
_MAGIC = b"PDCOHBIN"
_DROP_KEYS = ("built_at",)

_FORMATS = ("csv", "binary")


def _clean(header):
    out = {}
    for key, value in header.items():
        if key in _DROP_KEYS:
            continue
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        if not isinstance(value, (str, int, float, bool)):
            value = str(value)
        out[str(key)] = value
    return out


def _axis_spec(name, axis):
    axis = np.asarray(axis, dtype=float)
    if axis.size == 0:
        raise ConfigurationError(f"axis {name} is empty")
    step = float(axis[1] - axis[0]) if axis.size > 1 else 0.0
    if axis.size > 1:
        dev = np.max(np.abs(np.diff(axis) - step))
        if dev > 1e-9 * abs(step):
            raise ConfigurationError(f"axis {name} is not uniform")
    return {f"{name}_start": float(axis[0]), f"{name}_step": step,
            f"n_{name}": int(axis.size)}


def _axis_from(header, name):
    try:
        start = header.pop(f"{name}_start")
        step = header.pop(f"{name}_step")
        count = header.pop(f"n_{name}")
    except KeyError as exc:
        raise ConfigurationError(f"header lacks axis key {exc}") from exc
    return start + np.arange(int(count)) * step


def _require(header, key, path):
    try:
        return header.pop(key)
    except KeyError as exc:
        raise ConfigurationError(f"{path}: header lacks {key!r}") from exc


# --- CSV encoding ---


def _fmt(value):
    return repr(float(value))


def _write_csv(path, header, arrays):
    lines = [f"# pdcoh_file: {_VERSION}"]
    for key, value in header.items():
        lines.append(f"# {key}: {json.dumps(value)}")
    lines.append("# columns: " + json.dumps(
        [[name, "complex" if np.iscomplexobj(arr) else "real"]
         for name, arr in arrays]))
    for name, arr in arrays:
        arr = np.atleast_2d(arr)
        for row in arr:
            if np.iscomplexobj(row):
                cells = [f"{_fmt(v.real)},{_fmt(v.imag)}" for v in row]
            else:
                cells = [_fmt(v) for v in row]
            lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _read_csv(path):
    header, columns, rows = {}, None, []
    with open(path) as fh:
        first = fh.readline().strip()
        if first != f"# pdcoh_file: {_VERSION}":
            raise ConfigurationError(f"{path}: not a pdcoh CSV file")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# columns:"):
                columns = json.loads(line.split(":", 1)[1])
            elif line.startswith("#"):
                key, _, raw = line[1:].partition(":")
                header[key.strip()] = json.loads(raw.strip())
            else:
                rows.append(np.array(line.split(","), dtype=float))
    if columns is None:
        raise ConfigurationError(f"{path}: header lacks the column listing")
    return header, columns, rows


def _assemble_csv_arrays(header, columns, rows, path):
    # rows divide evenly between the named arrays, in listed order
    if len(columns) == 0 or len(rows) % len(columns):
        raise ConfigurationError(f"{path}: row count does not match columns")
    per = len(rows) // len(columns)
    arrays = {}
    for idx, (name, kind) in enumerate(columns):
        block = np.array(rows[idx * per:(idx + 1) * per])
        if kind == "complex":
            block = block[:, 0::2] + 1j * block[:, 1::2]
        arrays[name] = block
    return arrays


# --- binary encoding ---


def _write_binary(path, header, arrays):
    meta = dict(header)
    meta["pdcoh_file"] = _VERSION
    meta["arrays"] = [[name, np.asarray(arr).dtype.newbyteorder("<").str,
                       list(np.atleast_2d(arr).shape)] for name, arr in arrays]
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, arr in arrays:
            data = np.ascontiguousarray(np.atleast_2d(arr))
            fh.write(data.astype(data.dtype.newbyteorder("<")).tobytes())


def _read_binary(path):
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ConfigurationError(f"{path}: not a pdcoh binary file")
        (length,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(length).decode())
        if meta.pop("pdcoh_file", None) != _VERSION:
            raise ConfigurationError(f"{path}: unsupported format version")
        arrays = {}
        for name, dtype, shape in meta.pop("arrays"):
            count = int(np.prod(shape))
            raw = fh.read(count * np.dtype(dtype).itemsize)
            arrays[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return meta, arrays


def _dispatch_write(path, fmt, header, arrays):
    if fmt not in _FORMATS:
        raise ConfigurationError(f"unknown output format {fmt!r}; "
                                 f"choose one of {_FORMATS}")
    if fmt == "csv":
        _write_csv(path, header, arrays)
    else:
        _write_binary(path, header, arrays)


def _dispatch_read(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
    if magic == _MAGIC:
        return _read_binary(path)
    header, columns, rows = _read_csv(path)
    return header, _assemble_csv_arrays(header, columns, rows, path)


# --- grids and maps ---


def write_spectral_grid(path, sg, fmt="csv"):
    header = {"kind": "spectral-density"}
    header.update(_axis_spec("omega", sg.omega_axis()))
    header.update(_axis_spec("k", sg.k_axis()))
    header.update(_clean(sg.provenance))
    _dispatch_write(path, fmt, header, [("density", sg.values)])


def read_spectral_grid(path):
    header, arrays = _dispatch_read(path)
    if _require(header, "kind", path) != "spectral-density":
        raise ConfigurationError(f"{path}: not a spectral density grid")
    omega = _axis_from(header, "omega")
    k = _axis_from(header, "k")
    spec = GridSpec(omega_center=float(omega[omega.size // 2]),
                    omega_half_width=omega.size * float(omega[1] - omega[0]) / 2,
                    n_omega=omega.size,
                    k_half_width=k.size * float(k[1] - k[0]) / 2,
                    n_k=k.size)
    return SpectralGrid(spec, arrays["density"], provenance=header)


def write_wavelength_angle_grid(path, wag, fmt="csv"):
    header = {"kind": "wavelength-angle-density"}
    header.update(_axis_spec("wavelength", wag.wavelength_axis_m))
    header.update(_axis_spec("angle", wag.angle_axis_rad))
    header.update(_clean(wag.provenance))
    _dispatch_write(path, fmt, header, [("density", wag.values)])


def read_wavelength_angle_grid(path):
    header, arrays = _dispatch_read(path)
    if _require(header, "kind", path) != "wavelength-angle-density":
        raise ConfigurationError(f"{path}: not a wavelength-angle grid")
    wavelength = _axis_from(header, "wavelength")
    angle = _axis_from(header, "angle")
    return WavelengthAngleGrid(wavelength_axis_m=wavelength,
                               angle_axis_rad=angle,
                               values=arrays["density"], provenance=header)


def write_coherence_map(path, cmap, fmt="csv"):
    header = {"kind": "coherence-map",
              "carrier_omega": float(cmap.carrier_omega),
              "intensity": float(cmap.intensity)}
    header.update(_axis_spec("tau", cmap.tau_axis))
    header.update(_axis_spec("xi", cmap.xi_axis))
    header.update(_clean(cmap.provenance))
    _dispatch_write(path, fmt, header, [("g", cmap.g)])


def read_coherence_map(path):
    header, arrays = _dispatch_read(path)
    if _require(header, "kind", path) != "coherence-map":
        raise ConfigurationError(f"{path}: not a coherence map")
    tau = _axis_from(header, "tau")
    xi = _axis_from(header, "xi")
    return CoherenceMap(tau_axis=tau, xi_axis=xi,
                        g=np.asarray(arrays["g"], dtype=complex),
                        carrier_omega=_require(header, "carrier_omega", path),
                        intensity=_require(header, "intensity", path),
                        provenance=header)


def write_assembled_map(path, amap, fmt="csv"):
    header = {"kind": "assembled-map"}
    header.update(_axis_spec("tau", amap.tau_axis))
    header.update(_axis_spec("xi", amap.xi_axis))
    header.update(_clean(amap.provenance))
    _dispatch_write(path, fmt, header, [("magnitude", amap.magnitude)])


def read_assembled_map(path):
    header, arrays = _dispatch_read(path)
    if _require(header, "kind", path) != "assembled-map":
        raise ConfigurationError(f"{path}: not an assembled map")
    tau = _axis_from(header, "tau")
    xi = _axis_from(header, "xi")
    return AssembledMap(tau_axis=tau, xi_axis=xi,
                        magnitude=arrays["magnitude"], provenance=header)


def write_profile(path, kind, header, columns, fmt="csv"):
    """One-dimensional cuts: equal-length named columns side by side."""
    sizes = {np.asarray(arr).size for _, arr in columns}
    if len(sizes) != 1:
        raise ConfigurationError("profile columns differ in length")
    full = {"kind": kind}
    full.update(_clean(header))
    _dispatch_write(path, fmt, full,
                    [(name, np.asarray(arr).reshape(1, -1))
                     for name, arr in columns])


def read_profile(path, kind):
    header, arrays = _dispatch_read(path)
    if _require(header, "kind", path) != kind:
        raise ConfigurationError(f"{path}: expected a {kind} file")
    return header, {name: arr.ravel() for name, arr in arrays.items()}


# --- metrics, traces, manifests ---


def write_metrics(path, mapping):
    """Flat `key = value` record; values survive a JSON round trip."""
    lines = [f"# pdcoh_metrics: {_VERSION}"]
    for key, value in _clean(mapping).items():
        lines.append(f"{key} = {json.dumps(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_metrics(path):
    out = {}
    with open(path) as fh:
        first = fh.readline().strip()
        if first != f"# pdcoh_metrics: {_VERSION}":
            raise ConfigurationError(f"{path}: not a pdcoh metrics file")
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition("=")
            out[key.strip()] = json.loads(raw.strip())
    return out


def write_trace(path, trace):
    header = {"kind": "fringe-trace",
              "bs2_position_m": float(trace.bs2_position_m),
              "tau_offset_s": float(trace.tau_offset_s),
              "carrier_omega": float(trace.carrier_omega),
              "orientation": trace.orientation,
              "source": trace.source,
              "icfg_hash": trace.icfg_hash}
    _write_csv(path, header,
               [("position_m", trace.positions_m.reshape(1, -1)),
                ("intensity", trace.intensities.reshape(1, -1))])


def read_trace(path):
    header, columns, rows = _read_csv(path)
    arrays = _assemble_csv_arrays(header, columns, rows, path)
    if _require(header, "kind", path) != "fringe-trace":
        raise ConfigurationError(f"{path}: not a fringe trace")
    return FringeTrace(positions_m=arrays["position_m"].ravel(),
                       intensities=arrays["intensity"].ravel(),
                       bs2_position_m=_require(header, "bs2_position_m", path),
                       tau_offset_s=_require(header, "tau_offset_s", path),
                       carrier_omega=_require(header, "carrier_omega", path),
                       orientation=header.get("orientation", ""),
                       source=header.get("source", ""),
                       icfg_hash=header.get("icfg_hash", ""))


def write_manifest(path, trace_paths):
    """Trace listing, one path per line, relative to the manifest."""
    base = Path(path).parent.resolve()
    lines = [f"# pdcoh_manifest: {_VERSION}"]
    for p in trace_paths:
        p = Path(p).resolve()
        try:
            lines.append(str(p.relative_to(base)))
        except ValueError:
            lines.append(str(p))
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path):
    base = Path(path).parent.resolve()
    out = []
    with open(path) as fh:
        first = fh.readline().strip()
        if first != f"# pdcoh_manifest: {_VERSION}":
            raise ConfigurationError(f"{path}: not a pdcoh trace manifest")
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            p = Path(line)
            out.append(p if p.is_absolute() else base / p)
    return out
