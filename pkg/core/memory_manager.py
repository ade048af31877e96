import json
import os
from datetime import datetime
from pathlib import Path

from tools.csv_io import atomic_write_text

MEMORY_DIR = "memory"
SESSION_FILE = "session.json"
MEMORY_BANK_FILE = "memory_bank.json"


class MemoryManager:
    """Run history of scenario batches: full session log + compact memory bank."""

    def __init__(self, root):
        self.root = Path(root) / MEMORY_DIR
        self.session_file = self.root / SESSION_FILE
        self.memory_bank_file = self.root / MEMORY_BANK_FILE
        os.makedirs(self.root, exist_ok=True)

        # Load session OR default structure
        self.session = self._load(self.session_file)
        if not isinstance(self.session, dict):
            self.session = {}
        self.session.setdefault("runs", [])

    # ---------- FILE HELPERS ----------
    def _load(self, path):
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError):
            return None

    def _save(self, path, data):
        atomic_write_text(path, json.dumps(data, indent=2, default=str))

    # ---------- SESSION MEMORY ----------
    def add_run(self, run_dict):
        """
        Stores one batch:
        - config, every RunRecord, report and figure paths
        """
        self.session["runs"].append({
            "timestamp": str(datetime.now()),
            "data": run_dict,
        })
        self._save(self.session_file, self.session)

    def get_runs(self):
        """Returns list of all past batches."""
        return self.session.get("runs", [])

    def get_run(self, index: int):
        runs = self.get_runs()
        if 0 <= index < len(runs):
            return runs[index]
        return None

    # ---------- MEMORY BANK ----------
    def append_to_memory_bank(self, summary: dict):
        """
        Writes a compact batch summary into long-term memory.
        """
        bank = self._load(self.memory_bank_file)
        if not isinstance(bank, list):
            bank = []

        bank.append(summary)
        self._save(self.memory_bank_file, bank)

    def get_memory_bank(self):
        """Returns all long-term memory entries."""
        bank = self._load(self.memory_bank_file)
        return bank if isinstance(bank, list) else []
