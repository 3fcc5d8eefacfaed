"""Point cloud and mesh file I/O in plain interchange formats.

Supported cloud inputs: whitespace XYZ (3 or 6 columns), PLY (ascii or
binary little-endian, float vertex properties), and OBJ ``v`` records.
Meshes are written as OBJ; floats use shortest round-trip repr so a
write/read cycle is lossless.
"""

from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ParseError, UnsupportedFormat
from .model import PointCloud, TriangleMesh


class CloudFileFormat(Enum):
    XYZ_ASCII = "xyz"
    PLY_ASCII = "ply_ascii"
    PLY_BINARY_LE = "ply_binary_le"
    OBJ_POINTS = "obj"


_EXTENSIONS = {".xyz": CloudFileFormat.XYZ_ASCII, ".obj": CloudFileFormat.OBJ_POINTS}


def detect_format(path) -> CloudFileFormat:
    ext = Path(path).suffix.lower()
    if ext in _EXTENSIONS:
        return _EXTENSIONS[ext]
    if ext == ".ply":
        with open(path, "rb") as fh:
            header = fh.read(512)
        if b"binary_little_endian" in header:
            return CloudFileFormat.PLY_BINARY_LE
        return CloudFileFormat.PLY_ASCII
    raise UnsupportedFormat(f"cannot infer cloud format from extension {ext!r}")


def read_point_cloud(path, fmt: CloudFileFormat | None = None) -> PointCloud:
    """Read all point records in file order; normals kept when present."""
    if fmt is None:
        fmt = detect_format(path)
    if fmt == CloudFileFormat.XYZ_ASCII:
        return _read_xyz(path)
    if fmt in (CloudFileFormat.PLY_ASCII, CloudFileFormat.PLY_BINARY_LE):
        return _read_ply(path)
    if fmt == CloudFileFormat.OBJ_POINTS:
        return _read_obj_points(path)
    raise UnsupportedFormat(f"unknown format {fmt}")


def _finish_cloud(points, normals, path):
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    nrm = None
    if normals is not None:
        nrm = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
        lengths = np.linalg.norm(nrm, axis=1)
        if np.any(lengths <= 0):
            raise ParseError(f"{path}: zero-length normal in record "
                             f"{int(np.flatnonzero(lengths <= 0)[0])}")
        nrm = nrm / lengths[:, None]
    try:
        return PointCloud(pts, nrm)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _read_xyz(path) -> PointCloud:
    points, normals = [], []
    arity = None
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens or tokens[0].startswith("#"):
                continue
            if arity is None:
                if len(tokens) not in (3, 6):
                    raise ParseError(f"{path}:{lineno}: expected 3 or 6 values, got {len(tokens)}")
                arity = len(tokens)
            if len(tokens) != arity:
                raise ParseError(f"{path}:{lineno}: expected {arity} values, got {len(tokens)}")
            try:
                vals = [float(t) for t in tokens]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            points.append(vals[:3])
            if arity == 6:
                normals.append(vals[3:])
    return _finish_cloud(points, normals if normals else None, path)


def _read_obj_points(path) -> PointCloud:
    points = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens or tokens[0] != "v":
                continue
            if len(tokens) < 4:
                raise ParseError(f"{path}:{lineno}: vertex record needs 3 coordinates")
            try:
                points.append([float(t) for t in tokens[1:4]])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return _finish_cloud(points, None, path)


_PLY_FLOAT_TYPES = {"float": "<f4", "float32": "<f4", "double": "<f8", "float64": "<f8"}


def _parse_ply_header(fh, path):
    """Returns (is_binary, vertex_count, property names+dtypes, data offset)."""
    line = fh.readline()
    if line.strip() != b"ply":
        raise ParseError(f"{path}: missing 'ply' magic at byte 0")
    is_binary = None
    elements = []  # (name, count, [(prop_name, dtype_str)])
    current = None
    while True:
        raw = fh.readline()
        if not raw:
            raise ParseError(f"{path}: header ended before end_header (byte {fh.tell()})")
        tokens = raw.decode("ascii", "replace").split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if tokens[1] == "ascii":
                is_binary = False
            elif tokens[1] == "binary_little_endian":
                is_binary = True
            else:
                raise UnsupportedFormat(f"{path}: unsupported PLY format {tokens[1]!r}")
        elif tokens[0] == "element":
            current = (tokens[1], int(tokens[2]), [])
            elements.append(current)
        elif tokens[0] == "property":
            if current is None:
                raise ParseError(f"{path}: property before element (byte {fh.tell()})")
            if tokens[1] == "list":
                current[2].append((tokens[-1], "list", tuple(tokens[2:4])))
            else:
                current[2].append((tokens[-1], tokens[1], None))
        elif tokens[0] == "end_header":
            break
    if is_binary is None:
        raise ParseError(f"{path}: header has no format line")
    return is_binary, elements, fh.tell()


def _read_ply(path) -> PointCloud:
    with open(path, "rb") as fh:
        is_binary, elements, offset = _parse_ply_header(fh, path)
        if not elements or elements[0][0] != "vertex":
            raise UnsupportedFormat(f"{path}: first PLY element must be 'vertex'")
        _, count, props = elements[0]
        names = [p[0] for p in props]
        for name, ptype, _ in props:
            if ptype == "list" or ptype not in _PLY_FLOAT_TYPES:
                raise UnsupportedFormat(
                    f"{path}: vertex property {name!r} has non-float type {ptype!r}")
        for axis in ("x", "y", "z"):
            if axis not in names:
                raise ParseError(f"{path}: vertex element lacks property {axis!r}")
        has_normals = all(n in names for n in ("nx", "ny", "nz"))

        if is_binary:
            dtype = np.dtype([(name, _PLY_FLOAT_TYPES[ptype]) for name, ptype, _ in props])
            blob = fh.read(count * dtype.itemsize)
            if len(blob) != count * dtype.itemsize:
                raise ParseError(
                    f"{path}: vertex data truncated at byte {offset + len(blob)} "
                    f"(expected {count} records)")
            records = np.frombuffer(blob, dtype=dtype, count=count)
            cols = {name: records[name].astype(np.float64) for name in names}
        else:
            rows = []
            for i in range(count):
                raw = fh.readline()
                if not raw:
                    raise ParseError(f"{path}: vertex data truncated after {i} of {count} records")
                tokens = raw.split()
                if len(tokens) != len(props):
                    raise ParseError(
                        f"{path}: vertex record {i} has {len(tokens)} values, expected {len(props)}")
                try:
                    rows.append([float(t) for t in tokens])
                except ValueError as exc:
                    raise ParseError(f"{path}: vertex record {i}: {exc}") from exc
            table = np.asarray(rows, dtype=np.float64).reshape(count, len(props))
            cols = {name: table[:, k] for k, name in enumerate(names)}

    points = np.column_stack([cols["x"], cols["y"], cols["z"]])
    normals = None
    if has_normals:
        normals = np.column_stack([cols["nx"], cols["ny"], cols["nz"]])
    return _finish_cloud(points, normals, path)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_point_cloud(cloud: PointCloud, path) -> None:
    """Write an XYZ text file (6 columns when the cloud carries normals)."""
    with open(path, "w") as fh:
        if cloud.has_normals:
            for p, n in zip(cloud.points, cloud.normals):
                fh.write(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])} "
                         f"{_fmt(n[0])} {_fmt(n[1])} {_fmt(n[2])}\n")
        else:
            for p in cloud.points:
                fh.write(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")


def write_mesh(mesh: TriangleMesh, path) -> None:
    """Write OBJ: `v x y z` lines, then `f i j k` lines with 1-based indices."""
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def read_mesh(path) -> TriangleMesh:
    """Read an OBJ mesh (v/f records only; the inverse of write_mesh)."""
    vertices, faces = [], []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens or tokens[0].startswith("#"):
                continue
            if tokens[0] == "v":
                if len(tokens) < 4:
                    raise ParseError(f"{path}:{lineno}: vertex record needs 3 coordinates")
                vertices.append([float(t) for t in tokens[1:4]])
            elif tokens[0] == "f":
                if len(tokens) != 4:
                    raise ParseError(f"{path}:{lineno}: only triangle faces are supported")
                try:
                    faces.append([int(t.split("/")[0]) - 1 for t in tokens[1:]])
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from exc
    verts = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    idx = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    try:
        return TriangleMesh(verts, idx)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
