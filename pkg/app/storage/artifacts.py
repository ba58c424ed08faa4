"""
CSV and JSON artifacts: field files, reports and plot-ready tables
"""

import logging
import os
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.core.exceptions import ArgumentError, ConfigError
from app.services.field import Field
from app.services.mesh import Mesh

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ["cell_index", "coord1", "coord2", "measure", "value"]


def field_frame(mesh: Mesh, values) -> pd.DataFrame:
    values = mesh.check_field(values, "field")
    return pd.DataFrame(
        {
            "cell_index": np.arange(mesh.n_cells),
            "coord1": mesh.cell_centers[:, 0],
            "coord2": mesh.cell_centers[:, 1],
            "measure": mesh.cell_measures,
            "value": values,
        },
        columns=FIELD_COLUMNS,
    )


def read_field_csv(path: str, mesh: Optional[Mesh] = None) -> Field:
    """Load the value column of a field CSV, checking cell order and count against the mesh"""
    if not os.path.exists(path):
        raise ConfigError(f"field file not found: {path}")
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ConfigError(f"could not parse field file {path}: {e}") from e

    missing = [c for c in FIELD_COLUMNS if c not in df.columns]
    if missing:
        raise ConfigError(f"field file {path} lacks columns {missing}")
    if not np.array_equal(df["cell_index"].to_numpy(), np.arange(len(df))):
        raise ConfigError(f"field file {path} must list cells in index order 0..n-1")
    if mesh is not None and len(df) != mesh.n_cells:
        raise ConfigError(f"field file {path} has {len(df)} rows, mesh has {mesh.n_cells} cells")
    return df["value"].to_numpy(dtype=float)


class ArtifactWriter:
    """Writes run artifacts into one output directory (UTF-8, LF line endings)"""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: List[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _record(self, name: str) -> str:
        path = self.path(name)
        self.written.append(path)
        logger.info(f"Wrote {path}")
        return path

    def write_frame(self, name: str, df: pd.DataFrame) -> str:
        df.to_csv(self.path(name), index=False, lineterminator="\n", encoding="utf-8")
        return self._record(name)

    def write_field(self, name: str, mesh: Mesh, values) -> str:
        return self.write_frame(name, field_frame(mesh, values))

    def write_table(self, name: str, rows: Iterable[Sequence], columns: Sequence[str]) -> str:
        return self.write_frame(name, pd.DataFrame(list(rows), columns=list(columns)))

    def write_series(self, name: str, values: Sequence[float], column: str) -> str:
        df = pd.DataFrame({"iteration": np.arange(len(values)), column: list(values)})
        return self.write_frame(name, df)

    def write_json(self, name: str, model: BaseModel) -> str:
        if not isinstance(model, BaseModel):
            raise ArgumentError("write_json expects a pydantic model")
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as f:
            f.write(model.model_dump_json(indent=2, by_alias=True))
            f.write("\n")
        return self._record(name)
