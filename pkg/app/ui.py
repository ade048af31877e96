import streamlit as st
import os
import sys

import pandas as pd

# Fix import path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.config import DEFAULT_OUTPUT_DIR, ENV_OUTPUT_DIR
from core.memory_manager import MemoryManager


# ---------------------------
# CONFIG
# ---------------------------
st.set_page_config(page_title="Malaria OCP results", layout="wide")

if "selected_run" not in st.session_state:
    st.session_state.selected_run = None


# ---------------------------
# HELPERS
# ---------------------------
def read_text(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


# ---------------------------
# HEADER
# ---------------------------
st.title("Malaria optimal control: finished batches")
st.markdown("Browse batches written by `python -m app.cli run`. Runs are started from the CLI only.")

output_dir = st.sidebar.text_input("Output directory", os.getenv(ENV_OUTPUT_DIR, DEFAULT_OUTPUT_DIR))
memory = MemoryManager(output_dir)


# ---------------------------
# SIDEBAR MEMORY VIEW
# ---------------------------
st.sidebar.title("Run history")
runs = memory.get_runs()

if not runs:
    st.sidebar.info("No batches recorded in this directory yet.")
else:
    labels = [f"{i + 1}: {r['timestamp']}" for i, r in enumerate(runs)]
    choice = st.sidebar.selectbox("Batch", labels, index=len(labels) - 1)
    st.session_state.selected_run = labels.index(choice)

if st.sidebar.button("Show summaries"):
    for s in memory.get_memory_bank():
        st.sidebar.json(s)


# ---------------------------
# DISPLAY BATCH
# ---------------------------
if st.session_state.selected_run is not None:
    run = memory.get_run(st.session_state.selected_run)
    data = run["data"]

    st.success(f"Batch recorded {run['timestamp']}")

    # ---------- Records ----------
    st.subheader("Cells")
    st.dataframe(pd.DataFrame(data["records"]).drop(columns=["paths"], errors="ignore"))

    # ---------- Comparison ----------
    comparison = data.get("report", {}).get("comparison")
    if comparison and os.path.exists(comparison):
        st.subheader("Against no control")
        st.dataframe(pd.read_csv(comparison))

    # ---------- Figures ----------
    st.subheader("Figures")
    for name, path in sorted(data.get("figures", {}).items()):
        if os.path.exists(path):
            with st.expander(name):
                svg = read_text(path)
                st.markdown(svg[svg.find("<svg"):], unsafe_allow_html=True)

    st.expander("Scenario configuration").json(data.get("config", {}))
