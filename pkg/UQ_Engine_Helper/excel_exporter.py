"""
Excel export of benchmark reports for UQ Engine Helper package.
"""

import io
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from openpyxl import Workbook
from openpyxl.worksheet.worksheet import Worksheet

from .config import ExcelStyling

logger = logging.getLogger(__name__)


class ExcelExporter:
    """Writes report tables into a styled workbook, one sheet per table."""

    def __init__(self, styling: Optional[ExcelStyling] = None):
        self.styling = styling or ExcelStyling()

    def create_workbook(self, reports: Dict[str, List[List[Any]]], highlight_column: Optional[str] = None) -> bytes:
        """
        Build the workbook.

        Args:
            reports: Sheet name -> header-first table
            highlight_column: Header whose best (largest) value marks its row

        Returns:
            The ``.xlsx`` file contents
        """
        wb = Workbook()
        wb.remove(wb.active)
        for name, table in reports.items():
            ws = wb.create_sheet(title=name[:31])
            self._add_table(ws, table, highlight_column)
            self._auto_fit_columns(ws)
        if not wb.worksheets:
            wb.create_sheet(title="Empty")

        output = io.BytesIO()
        wb.save(output)
        return output.getvalue()

    def save_workbook(self, path: Union[str, Path], reports: Dict[str, List[List[Any]]],
                      highlight_column: Optional[str] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.create_workbook(reports, highlight_column))
        logger.info(f"Workbook written to {path}")
        return path

    @staticmethod
    def _ratio(value: Any) -> Optional[float]:
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str) and value.endswith("%"):
            try:
                return float(value[:-1]) / 100
            except ValueError:
                return None
        return None

    def _best_row(self, table: List[List[Any]], highlight_column: Optional[str]) -> Optional[int]:
        if not highlight_column or not table or highlight_column not in table[0]:
            return None
        column = table[0].index(highlight_column)
        scored = [(self._ratio(row[column]), idx) for idx, row in enumerate(table[1:], 1)]
        scored = [(score, idx) for score, idx in scored if score is not None]
        return max(scored)[1] if scored else None

    def _add_table(self, ws: Worksheet, table: List[List[Any]], highlight_column: Optional[str]) -> None:
        best = self._best_row(table, highlight_column)
        for row_idx, row_data in enumerate(table):
            for col_idx, value in enumerate(row_data, 1):
                cell = ws.cell(row=row_idx + 1, column=col_idx, value=value)
                cell.alignment = self.styling.center_alignment
                cell.border = self.styling.thin_border
                if row_idx == 0:
                    cell.fill = self.styling.header_fill
                    cell.font = self.styling.header_font
                elif row_idx == best:
                    cell.fill = self.styling.highlight_fill
                    cell.font = self.styling.highlight_font

    def _auto_fit_columns(self, ws: Worksheet) -> None:
        for column in ws.columns:
            longest = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            ws.column_dimensions[column[0].column_letter].width = min(longest + 3, 50)
