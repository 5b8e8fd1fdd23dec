"""
Plain-text rendering of report tables for the terminal.
"""

from typing import Any, Dict, List


class TextReportGenerator:
    """Renders header-first tables as fixed-width text."""

    @staticmethod
    def format_table(table: List[List[Any]]) -> str:
        if not table:
            return ""
        widths = [0] * max(len(row) for row in table)
        for row in table:
            for index, cell in enumerate(row):
                widths[index] = max(widths[index], len(str(cell)))

        lines = []
        for row_idx, row in enumerate(table):
            line = " | ".join(f"{str(cell):^{widths[i]}}" for i, cell in enumerate(row))
            lines.append(line)
            if row_idx == 0:  # Header
                lines.append("-" * len(line))
        return "\n".join(lines)

    @classmethod
    def create_text_report(cls, title: str, reports: Dict[str, List[List[Any]]]) -> str:
        """One section per non-empty table."""
        content = f"{title}\n\n"
        for report_name, report_data in reports.items():
            if report_data and len(report_data) > 1:
                content += f"{report_name}:\n"
                content += "=" * 60 + "\n"
                content += cls.format_table(report_data) + "\n\n"
        return content.rstrip() + "\n"
