"""Run history for the quadperiod command line."""
import json
import logging
import sqlite3
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .config import DB_PATH

logger = logging.getLogger(__name__)

RUN_STATUSES = ("pending", "success", "failed")


class DatabaseManager:
    """Manages the ``runs`` table that records CLI invocations."""

    db_path: Path = DB_PATH

    def __init__(self, db_path: Optional[Union[str, Path]] = None):
        """Open (and if needed create) the run database.

        Args:
            db_path: Database file; defaults to the configured DB_PATH
        """
        if db_path is not None:
            self.db_path = Path(db_path)
        self._create_tables()

    def _create_tables(self) -> None:
        """Create the runs table if it does not exist."""
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    arguments TEXT NOT NULL,
                    started_at TIMESTAMP NOT NULL,
                    finished_at TIMESTAMP,
                    status TEXT NOT NULL,
                    error_message TEXT,
                    summary TEXT
                )
            """)
            conn.commit()

    @staticmethod
    def _encode_arguments(arguments: Dict[str, Any]) -> str:
        return json.dumps(arguments, sort_keys=True, default=str)

    def add_run(self, command: str, arguments: Dict[str, Any]) -> int:
        """
        Record a new run with 'pending' status.

        Args:
            command: The subcommand name
            arguments: The parsed arguments, stored as canonical JSON

        Returns:
            int: The ID of the new run
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute(
                "INSERT INTO runs (command, arguments, started_at, status) VALUES (?, ?, ?, ?)",
                (command, self._encode_arguments(arguments), datetime.now(), "pending")
            )
            conn.commit()
            logger.debug(f"Recorded run {cursor.lastrowid} for '{command}'")
            return cursor.lastrowid

    def update_run_status(self, run_id: int, status: str, error_message: Optional[str] = None,
                          summary: Optional[str] = None) -> None:
        """
        Close a run.

        Args:
            run_id: The ID of the run
            status: 'success', 'failed' or 'pending'
            error_message: Why the run failed, if it did
            summary: Short description of the result
        """
        if status not in RUN_STATUSES:
            raise ValueError(f"Unknown run status '{status}'")
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute(
                "UPDATE runs SET status = ?, finished_at = ?, error_message = ?, summary = ? WHERE id = ?",
                (status, datetime.now(), error_message, summary, run_id)
            )
            conn.commit()

    def get_run_history(self, limit: int = 10) -> List[Dict]:
        """
        Get the most recent runs, newest first.

        Args:
            limit: Maximum number of runs to retrieve

        Returns:
            List of dictionaries containing run information
        """
        with sqlite3.connect(self.db_path) as conn:
            conn.row_factory = sqlite3.Row
            cursor = conn.cursor()
            cursor.execute(
                """
                SELECT * FROM runs
                ORDER BY started_at DESC, id DESC
                LIMIT ?
                """,
                (limit,)
            )
            return [dict(row) for row in cursor.fetchall()]

    def get_run_stats(self) -> Dict:
        """
        Get counts of runs by status.

        Returns:
            Dictionary containing run statistics
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("""
                SELECT
                    COUNT(*) as total,
                    SUM(CASE WHEN status = 'success' THEN 1 ELSE 0 END) as successful,
                    SUM(CASE WHEN status = 'failed' THEN 1 ELSE 0 END) as failed,
                    SUM(CASE WHEN status = 'pending' THEN 1 ELSE 0 END) as pending
                FROM runs
            """)
            row = cursor.fetchone()
            return {
                "total_runs": row[0],
                "successful_runs": row[1] or 0,
                "failed_runs": row[2] or 0,
                "pending_runs": row[3] or 0
            }

    def find_successful_run(self, command: str, arguments: Dict[str, Any]) -> Optional[Dict]:
        """
        Look up an earlier successful run with identical arguments.

        Returns:
            The latest matching run, or None
        """
        with sqlite3.connect(self.db_path) as conn:
            conn.row_factory = sqlite3.Row
            cursor = conn.cursor()
            cursor.execute(
                """
                SELECT * FROM runs
                WHERE command = ? AND arguments = ? AND status = 'success'
                ORDER BY id DESC
                LIMIT 1
                """,
                (command, self._encode_arguments(arguments))
            )
            row = cursor.fetchone()
            return dict(row) if row else None

    def cleanup_old_failed_runs(self, days: int = 30) -> int:
        """
        Remove failed runs older than specified days.

        Args:
            days: Number of days after which to remove failed runs

        Returns:
            int: Number of deleted rows
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute(
                """
                DELETE FROM runs
                WHERE status = 'failed'
                AND started_at < datetime('now', 'localtime', ?)
                """,
                (f'-{days} days',)
            )
            conn.commit()
            if cursor.rowcount:
                logger.info(f"Removed {cursor.rowcount} failed runs older than {days} days")
            return cursor.rowcount
