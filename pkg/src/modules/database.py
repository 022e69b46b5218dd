"""
Database module for the admissible-set cache (SQLite).
"""

import hashlib
import json
import logging
import os
import sqlite3
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional

from .errors import ConfigurationError
from .mas import AdmissibleSet

logger = logging.getLogger(__name__)


def content_hash(inputs: Dict) -> str:
    """SHA-256 of the canonical JSON of the construction inputs."""
    canonical = json.dumps(inputs, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


class SetCache:
    """SQLite cache of serialized admissible sets keyed by content hash."""

    def __init__(self, cache_dir: Optional[str] = None):
        """Resolve the cache file from PRG_CACHE_DIR and ENV_MODE."""
        self.env_mode = os.getenv('ENV_MODE', 'test')
        cache_dir = cache_dir or os.getenv('PRG_CACHE_DIR')

        if not cache_dir:
            raise ConfigurationError(
                "Cache directory not configured: set PRG_CACHE_DIR")

        Path(cache_dir).mkdir(parents=True, exist_ok=True)

        self.db_path = str(Path(cache_dir) / f"sets_{'prod' if self.env_mode == 'prod' else 'test'}.db")
        self.conn = None
        self.cursor = None
        self.hits = 0
        self.misses = 0

    def connect(self):
        """Establish database connection."""
        try:
            self.conn = sqlite3.connect(self.db_path)
            self.conn.row_factory = sqlite3.Row
            self.cursor = self.conn.cursor()
            self._create_tables()
            logger.info(f"Connected to set cache: {self.db_path}")
        except sqlite3.Error as e:
            logger.error(f"Error connecting to set cache: {str(e)}")
            raise

    def disconnect(self):
        """Close database connection."""
        if self.conn:
            self.conn.close()
            self.conn = None
            self.cursor = None

    def _create_tables(self):
        """Create the cache table if it doesn't exist."""
        try:
            self.cursor.execute("""
                CREATE TABLE IF NOT EXISTS admissible_sets (
                    content_hash TEXT PRIMARY KEY,
                    variant TEXT NOT NULL,
                    horizon INTEGER NOT NULL,
                    t_star INTEGER NOT NULL,
                    epsilon REAL NOT NULL,
                    rows INTEGER NOT NULL,
                    document TEXT NOT NULL,
                    created_at TIMESTAMP DEFAULT (strftime('%Y-%m-%dT%H:%M:%SZ', 'now'))
                )
            """)
            self.cursor.execute(
                "CREATE INDEX IF NOT EXISTS idx_variant ON admissible_sets(variant)")
            self.conn.commit()
        except sqlite3.Error as e:
            logger.error(f"Error creating cache tables: {str(e)}")
            raise

    def get(self, key: str) -> Optional[AdmissibleSet]:
        """Cached set for a content hash, or None."""
        try:
            self.cursor.execute(
                "SELECT document FROM admissible_sets WHERE content_hash = ?", (key,))
            row = self.cursor.fetchone()
            if row:
                return AdmissibleSet.from_document(json.loads(row['document']))
            return None
        except sqlite3.Error as e:
            logger.error(f"Error reading cached set: {str(e)}")
            raise

    def put(self, key: str, aset: AdmissibleSet):
        """Store (or replace) a set under its content hash."""
        try:
            self.cursor.execute(
                """INSERT OR REPLACE INTO admissible_sets
                   (content_hash, variant, horizon, t_star, epsilon, rows, document, created_at)
                   VALUES (?, ?, ?, ?, ?, ?, ?, ?)""",
                (key, aset.variant, aset.horizon, aset.t_star, aset.epsilon, aset.n_rows,
                 json.dumps(aset.to_document()),
                 datetime.now(timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')))
            self.conn.commit()
        except sqlite3.Error as e:
            logger.error(f"Error storing set: {str(e)}")
            self.conn.rollback()
            raise

    def list_sets(self) -> List[Dict]:
        """Metadata of every cached set, newest first."""
        try:
            self.cursor.execute(
                "SELECT content_hash, variant, horizon, t_star, epsilon, rows, created_at "
                "FROM admissible_sets ORDER BY created_at DESC")
            return [dict(row) for row in self.cursor.fetchall()]
        except sqlite3.Error as e:
            logger.error(f"Error listing cached sets: {str(e)}")
            raise

    def provide(self, inputs: Dict, builder: Callable[[], AdmissibleSet]) -> AdmissibleSet:
        """Return the cached set for inputs, building and storing it on a miss."""
        key = content_hash(inputs)
        cached = self.get(key)
        if cached is not None:
            self.hits += 1
            logger.info(f"Cache hit for {cached.variant} set {key[:12]} (t*={cached.t_star}, rows={cached.n_rows})")
            return cached
        self.misses += 1
        logger.info(f"Cache miss for {inputs.get('kind', 'set')} {key[:12]}; building")
        aset = builder()
        self.put(key, aset)
        return aset

    def __enter__(self):
        """Context manager entry."""
        self.connect()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Context manager exit."""
        self.disconnect()
