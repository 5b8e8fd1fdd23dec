"""
Results Viewer
A Streamlit page for browsing experiment results and benchmark timelines.
Read-only: it never steers a running experiment.
"""

import logging
import os

import streamlit as st

from UQ_Engine_Helper import (
    CheckpointError,
    ExcelExporter,
    ReportIoError,
    ResultsBrowser,
)
from utils.config import RESULTS_ROOT, RESULTS_ROOT_ENV_VAR

logging.basicConfig(level=logging.WARNING)
logger = logging.getLogger(__name__)


class ResultsViewerApp:
    """Main application class."""

    def __init__(self):
        self.excel_exporter = ExcelExporter()

    def run(self) -> None:
        st.set_page_config(page_title="UQ Results", page_icon="📈", layout="wide")
        st.title("📈 Experiment Results")

        default_root = os.environ.get(RESULTS_ROOT_ENV_VAR, RESULTS_ROOT)
        root = st.text_input("Results root", value=st.session_state.get("results_root", default_root))
        st.session_state.results_root = root
        browser = ResultsBrowser(root)

        if not browser.path_exists():
            st.info(f"No results found at `{root}`. Run an experiment or a benchmark first.")
            return

        try:
            self._render_experiments(browser)
            self._render_timelines(browser)
        except (CheckpointError, ReportIoError) as e:
            st.error(f"⚠️ Cannot read results: {e}")
        except Exception as e:
            logger.error(f"Unexpected error: {str(e)}")
            st.error(f"⚠️ An unexpected error occurred: {str(e)}")

    def _render_experiments(self, browser: ResultsBrowser) -> None:
        experiments = browser.get_experiments()
        if not experiments:
            st.info("No experiment directories under this root.")
            return

        name = st.selectbox("Experiment", experiments)
        summary = browser.load_summary(name)
        checkpoints = browser.get_checkpoints(name)
        latest = browser.latest_checkpoint(name)

        col1, col2, col3 = st.columns(3)
        col1.metric("Generations", len(summary))
        col2.metric("Checkpoints kept", len(checkpoints))
        col3.metric("Latest", latest.name if latest else "-")

        if summary.empty:
            st.warning("Summary is empty.")
            return

        progress_columns = [c for c in summary.columns if c not in ("Generation", "Evaluations", "Wall Time")]
        if progress_columns:
            st.line_chart(summary.set_index("Generation")[progress_columns])
        st.dataframe(summary, use_container_width=True)

        if latest is not None:
            with st.expander("Latest checkpoint"):
                payload = browser.load_checkpoint(name)
                st.write(f"**Seed:** {payload['seed']}  **Evaluations:** {payload['evaluations']:,}")
                st.json(payload["best"])

    def _render_timelines(self, browser: ResultsBrowser) -> None:
        timelines = browser.get_timelines()
        if not timelines:
            return
        st.subheader("Benchmark timelines")
        choice = st.selectbox("Timeline", [str(p.relative_to(browser.root)) for p in timelines])
        timeline = browser.load_timeline(browser.root / choice)
        if timeline.empty:
            st.info("Timeline is empty.")
            return

        workers = timeline["worker_id"].nunique()
        start, end = timeline["busy_start"].min(), timeline["busy_end"].max()
        busy = float((timeline["busy_end"] - timeline["busy_start"]).sum())
        col1, col2, col3 = st.columns(3)
        col1.metric("Workers", workers)
        col2.metric("Makespan [s]", f"{end - start:.3f}")
        col3.metric("e_busy", f"{busy / (workers * (end - start)):.1%}" if end > start else "-")

        per_worker = timeline.assign(busy=timeline["busy_end"] - timeline["busy_start"]).groupby("worker_id")["busy"].sum()
        st.bar_chart(per_worker)

        table = [list(timeline.columns)] + timeline.values.tolist()
        st.download_button(
            label="📥 Download timeline (.xlsx)",
            data=self.excel_exporter.create_workbook({"Timeline": table}),
            file_name=os.path.basename(choice).replace(".csv", ".xlsx"),
            mime="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
        )


def main():
    """Application entry point."""
    app = ResultsViewerApp()
    app.run()


if __name__ == "__main__":
    main()
