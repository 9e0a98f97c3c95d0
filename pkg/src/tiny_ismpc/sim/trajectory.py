"""
Trajectory
==========
기록된 시뮬레이션 샘플, CSV 입출력, gnuplot 스크립트.

CSV 헤더: t,x1..xn,u1..um,s1..sm,region,domain_exit[,V] (유효숫자 15자리)
"""

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..errors import ArtifactError

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    s: np.ndarray
    region: np.ndarray
    domain_exit: np.ndarray
    V: Optional[np.ndarray] = None

    @classmethod
    def allocate(cls, records: int, n: int, m: int, with_v: bool = False) -> "Trajectory":
        return cls(
            t=np.zeros(records),
            x=np.zeros((records, n)),
            u=np.zeros((records, m)),
            s=np.zeros((records, m)),
            region=np.zeros(records, dtype=int),
            domain_exit=np.zeros(records, dtype=bool),
            V=np.zeros(records) if with_v else None,
        )

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.u.shape[1]

    @property
    def xbar(self) -> np.ndarray:
        return np.hstack([self.x, self.u])

    @property
    def exit_count(self) -> int:
        return int(np.count_nonzero(self.domain_exit))

    def truncated(self, count: int) -> "Trajectory":
        """앞의 count 개 샘플만 남긴 사본 (발산 시 부분 궤적)"""
        return Trajectory(
            t=self.t[:count].copy(),
            x=self.x[:count].copy(),
            u=self.u[:count].copy(),
            s=self.s[:count].copy(),
            region=self.region[:count].copy(),
            domain_exit=self.domain_exit[:count].copy(),
            V=None if self.V is None else self.V[:count].copy(),
        )

    # ------------------------------------------------------------------
    # CSV
    # ------------------------------------------------------------------

    def header(self) -> List[str]:
        cols = ["t"]
        cols += [f"x{k + 1}" for k in range(self.n)]
        cols += [f"u{k + 1}" for k in range(self.m)]
        cols += [f"s{k + 1}" for k in range(self.m)]
        cols += ["region", "domain_exit"]
        if self.V is not None:
            cols.append("V")
        return cols

    def to_csv_text(self) -> str:
        lines = [",".join(self.header())]
        for k in range(len(self)):
            values = [self.t[k], *self.x[k], *self.u[k], *self.s[k]]
            row = [f"{float(v):.15g}" for v in values]
            row += [str(int(self.region[k])), "1" if self.domain_exit[k] else "0"]
            if self.V is not None:
                row.append(f"{float(self.V[k]):.15g}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv_text(), encoding="utf-8")
        logger.info("wrote %d samples to %s", len(self), path)
        return path

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ArtifactError(str(path), f"cannot read file: {exc.strerror or exc}") from exc
        return cls.from_csv_text(text, str(path))

    @classmethod
    def from_csv_text(cls, text: str, source: str = "<string>") -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ArtifactError(source, "empty trajectory file", 1, 1)
        header = rows[0]
        n = sum(1 for c in header if c.startswith("x"))
        m = sum(1 for c in header if c.startswith("u"))
        with_v = header[-1] == "V"
        expected = 1 + n + 2 * m + 2 + (1 if with_v else 0)
        if len(header) != expected or header[0] != "t":
            raise ArtifactError(source, f"unexpected header {','.join(header)}", 1, 1)
        traj = cls.allocate(len(rows) - 1, n, m, with_v)
        for k, row in enumerate(rows[1:]):
            line = k + 2
            if len(row) != expected:
                raise ArtifactError(source, f"expected {expected} columns, got {len(row)}", line, 1)
            try:
                values = [float(v) for v in row[: 1 + n + 2 * m]]
                traj.region[k] = int(row[1 + n + 2 * m])
                traj.domain_exit[k] = row[2 + n + 2 * m] == "1"
                if with_v:
                    traj.V[k] = float(row[-1])
            except ValueError as exc:
                raise ArtifactError(source, str(exc), line, 1) from exc
            traj.t[k] = values[0]
            traj.x[k] = values[1:1 + n]
            traj.u[k] = values[1 + n:1 + n + m]
            traj.s[k] = values[1 + n + m:]
        return traj


def write_plot_script(trajectory: Trajectory, csv_path, path, title: str = "closed loop") -> Path:
    """
    상태 / 입력 / 슬라이딩 변수 3단 그림을 그리는 gnuplot 스크립트.
    """
    csv_path = Path(csv_path)
    n, m = trajectory.n, trajectory.m
    lines = [
        f"# {title}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,1100",
        f"set output '{csv_path.with_suffix('.png').name}'",
        "set multiplot layout 3,1",
        "set grid",
        "set xlabel 't [s]'",
    ]

    def panel(label: str, first: int, count: int) -> None:
        lines.append(f"set ylabel '{label}'")
        parts = [f"'{csv_path.name}' using 1:{first + k} with lines lw 1.5" for k in range(count)]
        lines.append("plot " + ", \\\n     ".join(parts))

    panel("x(t)", 2, n)
    panel("u(t)", 2 + n, m)
    panel("s(t)", 2 + n + m, m)
    lines.append("unset multiplot")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
