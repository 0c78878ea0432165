"""Per-file version store: SHA-1 addressed blobs, named heads, linear
history, and forks that keep the origin's history.

Persistence is an append-only directory layout under a data root:
blobs/<sha1> holds content, heads/<name>.log holds one JSON commit record
per line.  Reopening a store replays the logs.  With root=None the store
is memory-only.
"""

from __future__ import annotations

import hashlib
import json
import re
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path

NAME_ALPHABET = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
# First character lowercase so a generated name reads as an atom and
# ':- include(name).' works without quotes.
NAME_FIRST_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
NAME_LENGTH = 10
_NAME_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")
_HEX40_RE = re.compile(r"^[0-9a-f]{40}$")


class StoreError(Exception):
    code = "store_error"


class NotFound(StoreError):
    code = "not_found"


class NameTaken(StoreError):
    code = "name_taken"


class BadName(StoreError):
    code = "bad_name"


class EmptyContent(StoreError):
    code = "empty_content"


class VersionNotInHistory(StoreError):
    code = "version_not_in_history"


class Conflict(StoreError):
    code = "conflict"

    def __init__(self, current: str):
        self.current = current
        super().__init__(f"head moved; current version is {current}")


def _random_name() -> str:
    head = secrets.choice(NAME_FIRST_ALPHABET)
    rest = "".join(secrets.choice(NAME_ALPHABET) for _ in range(NAME_LENGTH - 1))
    return head + rest


def blob_id(content: str | bytes) -> str:
    data = content.encode("utf-8") if isinstance(content, str) else content
    return hashlib.sha1(data).hexdigest()


def is_blob_ref(ref: str) -> bool:
    return bool(_HEX40_RE.match(ref))


@dataclass
class Commit:
    blob: str
    name: str
    previous: str | None
    time: float
    author: str | None = None
    forked_from: tuple[str, str] | None = None  # (source name, source blob)
    fork_src_index: int | None = None  # position in the source head's log

    def to_json(self) -> dict:
        return {
            "blob": self.blob,
            "name": self.name,
            "previous": self.previous,
            "time": self.time,
            "author": self.author,
            "forked_from": list(self.forked_from) if self.forked_from else None,
        }


class Store:
    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._blobs: dict[str, bytes] = {}
        self._heads: dict[str, list[Commit]] = {}
        self._blob_commit: dict[str, Commit] = {}
        self._lock = threading.Lock()
        self._head_locks: dict[str, threading.Lock] = {}
        if self.root is not None:
            (self.root / "blobs").mkdir(parents=True, exist_ok=True)
            (self.root / "heads").mkdir(parents=True, exist_ok=True)
            self._replay()

    # -- persistence

    def _replay(self) -> None:
        for path in sorted((self.root / "heads").glob("*.log")):
            name = path.stem
            commits = []
            for line in path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                raw = json.loads(line)
                commit = Commit(
                    blob=raw["blob"],
                    name=name,
                    previous=raw.get("previous"),
                    time=raw.get("time", 0.0),
                    author=raw.get("author"),
                    forked_from=tuple(raw["forked_from"]) if raw.get("forked_from") else None,
                    fork_src_index=raw.get("fork_src_index"),
                )
                commits.append(commit)
                self._blob_commit.setdefault(commit.blob, commit)
            if commits:
                self._heads[name] = commits

    def _blob_bytes(self, bid: str) -> bytes | None:
        data = self._blobs.get(bid)
        if data is not None:
            return data
        if self.root is not None:
            path = self.root / "blobs" / bid
            if path.is_file():
                data = path.read_bytes()
                self._blobs[bid] = data
                return data
        return None

    def _write_blob(self, bid: str, data: bytes) -> None:
        self._blobs[bid] = data
        if self.root is not None:
            path = self.root / "blobs" / bid
            if not path.exists():  # content-addressed: writes are idempotent
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(data)
                tmp.replace(path)

    def _append_log(self, commit: Commit) -> None:
        if self.root is None:
            return
        record = commit.to_json()
        record.pop("name")
        record["fork_src_index"] = commit.fork_src_index
        path = self.root / "heads" / f"{commit.name}.log"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")

    # -- locking

    def _head_lock(self, name: str) -> threading.Lock:
        with self._lock:
            lock = self._head_locks.get(name)
            if lock is None:
                lock = threading.Lock()
                self._head_locks[name] = lock
            return lock

    # -- operations

    def save_new(self, content: str, author: str | None = None) -> tuple[str, str]:
        """Anonymous save under a fresh random name."""
        if not content:
            raise EmptyContent("refusing to save empty content")
        data = content.encode("utf-8")
        bid = hashlib.sha1(data).hexdigest()
        with self._lock:
            while True:
                name = _random_name()
                if name not in self._heads:
                    break
            commit = Commit(blob=bid, name=name, previous=None, time=time.time(), author=author)
            self._write_blob(bid, data)
            self._heads[name] = [commit]
            self._blob_commit.setdefault(bid, commit)
        self._append_log(commit)
        return name, bid

    def save_version(self, name: str, content: str, expected_prev: str, author: str | None = None) -> str:
        if not content:
            raise EmptyContent("refusing to save empty content")
        with self._head_lock(name):
            commits = self._heads.get(name)
            if not commits:
                raise NotFound(f"no head named {name}")
            current = commits[-1].blob
            if current != expected_prev:
                raise Conflict(current)
            data = content.encode("utf-8")
            bid = hashlib.sha1(data).hexdigest()
            commit = Commit(blob=bid, name=name, previous=current, time=time.time(), author=author)
            self._write_blob(bid, data)
            commits.append(commit)
            self._blob_commit.setdefault(bid, commit)
            self._append_log(commit)
            return bid

    def fork(self, src_name: str, new_name: str | None = None, author: str | None = None) -> tuple[str, str]:
        with self._lock:
            src = self._heads.get(src_name)
            if not src:
                raise NotFound(f"no head named {src_name}")
            if new_name is not None:
                if not _NAME_RE.match(new_name):
                    raise BadName(f"invalid head name: {new_name!r}")
                if new_name in self._heads:
                    raise NameTaken(f"head {new_name} already exists")
                name = new_name
            else:
                while True:
                    name = _random_name()
                    if name not in self._heads:
                        break
            head = src[-1]
            commit = Commit(
                blob=head.blob,
                name=name,
                previous=None,
                time=time.time(),
                author=author,
                forked_from=(src_name, head.blob),
                fork_src_index=len(src) - 1,
            )
            self._heads[name] = [commit]
        self._append_log(commit)
        return name, commit.blob

    def history(self, name: str) -> list[Commit]:
        """Commits newest first, following fork links into the origin's
        history as it stood at fork time."""
        with self._lock:
            if name not in self._heads:
                raise NotFound(f"no head named {name}")
            out: list[Commit] = []
            current = name
            upto: int | None = None
            while current is not None:
                commits = self._heads.get(current, [])
                if upto is not None:
                    commits = commits[: upto + 1]
                out.extend(reversed(commits))
                oldest = commits[0] if commits else None
                if oldest is not None and oldest.forked_from is not None:
                    current = oldest.forked_from[0]
                    upto = oldest.fork_src_index
                else:
                    current = None
            return out

    def head(self, name: str) -> Commit:
        with self._lock:
            commits = self._heads.get(name)
            if not commits:
                raise NotFound(f"no head named {name}")
            return commits[-1]

    def exists(self, name: str) -> bool:
        with self._lock:
            return name in self._heads

    def load(self, ref: str, version: str | None = None) -> tuple[str, Commit]:
        """By name (latest or pinned version) or by 40-hex blob id."""
        if version is not None:
            for commit in self.history(ref):
                if commit.blob == version:
                    data = self._blob_bytes(version)
                    if data is None:
                        raise NotFound(f"missing blob {version}")
                    return data.decode("utf-8"), commit
            raise VersionNotInHistory(f"{version} is not in the history of {ref}")
        with self._lock:
            commits = self._heads.get(ref)
        if commits:
            head = commits[-1]
            data = self._blob_bytes(head.blob)
            if data is None:
                raise NotFound(f"missing blob {head.blob}")
            return data.decode("utf-8"), head
        if is_blob_ref(ref):
            data = self._blob_bytes(ref)
            if data is not None:
                commit = self._blob_commit.get(ref)
                if commit is None:
                    commit = Commit(blob=ref, name="", previous=None, time=0.0)
                return data.decode("utf-8"), commit
        raise NotFound(f"no file or blob {ref}")

    def resolve_include(self, spec: str) -> str | None:
        """Loader hook for ':- include(NameOrHash).'"""
        try:
            if is_blob_ref(spec):
                data = self._blob_bytes(spec)
                if data is not None:
                    return data.decode("utf-8")
                return None
            return self.load(spec)[0]
        except StoreError:
            return None
