"""File formats shared by the CLI: CSV signals, rotation files, PPM, JSON.

All floating point values are serialized with 17 significant digits so
round trips are exact for doubles.
"""

import json

import numpy as np

__all__ = [
    "read_signal_csv",
    "write_signal_csv",
    "read_rotations",
    "write_rotations",
    "read_ppm",
    "write_ppm",
    "write_report",
    "read_report",
]

_FMT = "%.17g"


def write_signal_csv(path, x: np.ndarray):
    """One vertex per row, d comma-separated columns."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    np.savetxt(path, x, fmt=_FMT, delimiter=",")


def read_signal_csv(path) -> np.ndarray:
    x = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    if not np.isfinite(x).all():
        raise ValueError(f"{path}: non-finite values")
    return x


def read_rotations(path) -> np.ndarray:
    """Rotation data as an (N, 3, 3) stack.

    Accepted row layouts (whitespace- or comma-separated):
      4 columns   quaternion w xi xj xk (unit, w-first)
      9 columns   3 x 3 matrix, row-major
    Axis-angle rows `v1 v2 v3 alpha` are also accepted (4 columns are
    disambiguated by the norm: a unit quaternion row has norm 1, an
    axis-angle row has norm sqrt(1 + alpha^2) which only collides at
    alpha = 0, where both readings give the identity).
    """
    from relaxtik.manifold import axis_angle_to_rotation, quat_to_rotation

    raw = np.loadtxt(path, dtype=float, ndmin=2, delimiter=None)
    if raw.ndim != 2 or raw.shape[1] not in (4, 9):
        raise ValueError(f"{path}: expected 4 or 9 columns per row")
    if raw.shape[1] == 9:
        return raw.reshape(-1, 3, 3)
    norms = np.linalg.norm(raw, axis=1)
    if np.abs(norms - 1.0).max() <= 1e-6:
        return np.stack([quat_to_rotation(q / np.linalg.norm(q)) for q in raw])
    axes = raw[:, :3]
    if np.abs(np.linalg.norm(axes, axis=1) - 1.0).max() <= 1e-6:
        return np.stack([axis_angle_to_rotation(v, a) for v, a in zip(axes, raw[:, 3])])
    raise ValueError(f"{path}: rows are neither unit quaternions nor axis-angle")


def write_rotations(path, rs: np.ndarray, layout: str = "quaternion"):
    """Write rotations as quaternion rows or row-major 3 x 3 rows."""
    from relaxtik.manifold import rotation_to_quat

    rs = np.asarray(rs, dtype=float)
    if rs.ndim != 3 or rs.shape[1:] != (3, 3):
        raise ValueError("expected an (N, 3, 3) stack")
    if layout == "quaternion":
        rows = np.stack([rotation_to_quat(r) for r in rs])
    elif layout == "matrix":
        rows = rs.reshape(-1, 9)
    else:
        raise ValueError("layout must be 'quaternion' or 'matrix'")
    np.savetxt(path, rows, fmt=_FMT)


def read_ppm(path) -> np.ndarray:
    """Binary PPM (P6, maxval 255) as a float array in [0, 1], shape (h, w, 3)."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported")
    pos += 1  # single whitespace after maxval
    pix = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
    return pix.reshape(height, width, 3).astype(float) / 255.0


def write_ppm(path, img: np.ndarray):
    img = np.asarray(img, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("image must have shape (h, w, 3)")
    pix = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    h, w, _ = pix.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(pix.tobytes())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.17g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_report(path, report: dict):
    with open(path, "w") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
