#!/usr/bin/env python3
"""
Self-test result tables and one-page PDF verdict certificates.
"""

import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Union

import pandas as pd

try:
    from reportlab.lib.colors import black
    from reportlab.lib.pagesizes import landscape, letter
    from reportlab.pdfgen import canvas
except ImportError:
    canvas = None

logger = logging.getLogger(__name__)

COLUMNS = ["suite", "item", "status", "detail", "seconds"]
STATUSES = ["pass", "fail", "budget"]


def results_frame(rows: Iterable[Mapping]) -> pd.DataFrame:
    """One row per checked item; missing columns are filled with empty values."""
    frame = pd.DataFrame(list(rows), columns=COLUMNS)
    frame["detail"] = frame["detail"].fillna("")
    frame["seconds"] = frame["seconds"].fillna(0.0).astype(float)
    return frame


def summary_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Pass, fail and budget counts per suite, in order of first appearance."""
    counts = pd.crosstab(frame["suite"], frame["status"])
    counts = counts.reindex(columns=STATUSES, fill_value=0)
    order = list(dict.fromkeys(frame["suite"]))
    counts = counts.reindex(order).fillna(0).astype(int)
    counts["seconds"] = frame.groupby("suite")["seconds"].sum().reindex(order).round(2)
    counts.index.name = "suite"
    return counts.reset_index()


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def pdf_available() -> bool:
    return canvas is not None


@dataclass
class VerdictCertificate:
    """
    A one-page certificate stating a formula and its verdict.

    Args:
        formula: Formula text
        verdict: "theorem" or "non-theorem"
        system: Calculus used for the decision
        detail: Proof size or countermodel size line
        issued: Date line, defaults to today
    """

    formula: str
    verdict: str
    system: str = "ILmPs"
    detail: str = ""
    issued: Optional[str] = None

    positions = {
        'title': {'y': 470, 'font': 'Helvetica-Bold', 'size': 24},
        'formula': {'y': 390, 'font': 'Courier-Bold', 'size': 14},
        'verdict': {'y': 320, 'font': 'Helvetica-Bold', 'size': 20},
        'system': {'y': 260, 'font': 'Helvetica', 'size': 14},
        'detail': {'y': 230, 'font': 'Helvetica', 'size': 12},
        'date': {'y': 109, 'font': 'Helvetica', 'size': 12},
    }

    def lines(self) -> List[tuple]:
        phrases = {"theorem": "is a theorem of IL-(P)", "non-theorem": "is not a theorem of IL-(P)"}
        verdict = phrases.get(self.verdict, self.verdict)
        return [
            ('title', "Certificate of Verdict"),
            ('formula', self.formula),
            ('verdict', verdict),
            ('system', f"decided in {self.system}"),
            ('detail', self.detail),
            ('date', self.issued or date.today().isoformat()),
        ]

    def render(self, path: Union[str, Path]) -> Path:
        """Write the certificate; raises RuntimeError without reportlab."""
        if canvas is None:
            raise RuntimeError("PDF output not available (reportlab not installed)")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        page_width, page_height = landscape(letter)
        can = canvas.Canvas(str(path), pagesize=(page_width, page_height))
        can.setFillColor(black)
        for key, text in self.lines():
            if not text:
                continue
            pos = self.positions[key]
            size = pos['size']
            # long formulas shrink to fit the page width
            while size > 6 and can.stringWidth(text, pos['font'], size) > page_width - 72:
                size -= 1
            can.setFont(pos['font'], size)
            text_width = can.stringWidth(text, pos['font'], size)
            can.drawString(page_width / 2 - text_width / 2, pos['y'], text)
        can.showPage()
        can.save()
        logger.info("wrote certificate to %s", path)
        return path


def summary_certificate(summary: pd.DataFrame, seed: int) -> VerdictCertificate:
    """Certificate for a self-test run."""
    failures = int(summary["fail"].sum())
    passed = int(summary["pass"].sum())
    budget = int(summary["budget"].sum())
    return VerdictCertificate(
        formula=f"self-test, seed {seed}",
        verdict="all checks passed" if failures == 0 else f"{failures} checks failed",
        detail=f"{passed} passed, {failures} failed, {budget} over budget",
    )
