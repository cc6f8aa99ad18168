"""
PDF rendering of coverage reports

Uses fpdf2 with its built-in Helvetica font, so no font files are needed.
"""

from datetime import datetime, timezone
from typing import List, Optional

from fpdf import FPDF, XPos, YPos

from oob_forest.models import CoverageReport


class CoverageReportPdf(FPDF):
    """A4 page with a provenance header and one coverage / avg width table"""

    # Color definitions (RGB)
    COLOR_PRIMARY = (30, 58, 138)      # Dark blue
    COLOR_HEADER_BG = (243, 244, 246)  # Light gray
    COLOR_TEXT = (55, 65, 81)          # Dark gray
    COLOR_MUTED = (107, 114, 128)      # Medium gray

    # Fixed so that identical reports produce identical files
    CREATION_DATE = datetime(2000, 1, 1, tzinfo=timezone.utc)

    def __init__(self, report: CoverageReport, title: Optional[str] = None):
        super().__init__()
        self.report = report
        self.title_text = title or f"Coverage of OOB confidence intervals ({report.rows[0].process})"
        self.set_creation_date(self.CREATION_DATE)
        self.set_auto_page_break(auto=True, margin=20)
        self.add_page()
        self._add_header()

    def _add_header(self):
        """Title plus the study configuration."""
        self.set_fill_color(*self.COLOR_HEADER_BG)
        self.rect(10, 10, 190, 30, 'F')

        self.set_font('Helvetica', 'B', 16)
        self.set_text_color(*self.COLOR_PRIMARY)
        self.set_xy(15, 14)
        self.cell(0, 8, self.title_text, new_x=XPos.LMARGIN, new_y=YPos.NEXT)

        self.set_font('Helvetica', '', 9)
        self.set_text_color(*self.COLOR_MUTED)
        self.set_x(15)
        config = self.report.config.header(sorted({r.n for r in self.report.rows})) if self.report.config else f"N = {self.report.n_replications}"
        self.multi_cell(180, 5, config)
        self.set_y(45)

    def render_table(self):
        """One row per nominal level, a coverage / avg len column pair per training size."""
        sizes: List[int] = sorted({r.n for r in self.report.rows})
        levels = sorted({r.level for r in self.report.rows})
        by_key = {(r.n, r.level): r for r in self.report.rows}
        first = 22
        pair = min(40, (190 - first) / max(1, len(sizes)) / 2)

        self.set_font('Helvetica', 'B', 9)
        self.set_text_color(*self.COLOR_TEXT)
        self.cell(first, 6, '', border='B')
        for n in sizes:
            self.cell(2 * pair, 6, f"n = {n}", border='B', align='C')
        self.ln()
        self.cell(first, 6, 'nominal', border='B', align='C')
        for _ in sizes:
            self.cell(pair, 6, 'coverage', border='B', align='C')
            self.cell(pair, 6, 'avg len', border='B', align='C')
        self.ln()

        self.set_font('Helvetica', '', 9)
        for level in levels:
            self.cell(first, 5, f"{level:.2f}", align='C')
            for n in sizes:
                row = by_key.get((n, level))
                self.cell(pair, 5, f"{row.coverage:.3f}" if row else '', align='C')
                self.cell(pair, 5, f"{row.avg_width:.5f}" if row else '', align='C')
            self.ln()

    def render_notes(self, notes: List[str]):
        if not notes:
            return
        self.ln(4)
        self.set_font('Helvetica', '', 9)
        self.set_text_color(*self.COLOR_MUTED)
        for note in notes:
            self.multi_cell(0, 5, note, new_x=XPos.LMARGIN, new_y=YPos.NEXT)


def generate_coverage_pdf(report: CoverageReport, path: str, notes: Optional[List[str]] = None) -> str:
    """
    Write a coverage report as a PDF file.

    Args:
        report: Report to render
        path: Destination file
        notes: Extra lines printed under the table (e.g. shrink exponents)

    Returns:
        Path of the written file
    """
    pdf = CoverageReportPdf(report)
    pdf.render_table()
    pdf.render_notes(notes or [])
    pdf.output(path)
    return path
