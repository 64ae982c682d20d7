"""Sealed on-disk log format.

Layout: magic ``BIBL1`` | 16-byte salt | 12-byte nonce | AES-256-GCM
ciphertext with its 16-byte tag.  The key is derived from the creating
authentication token with PBKDF2-HMAC-SHA256 over the per-file salt, and the
magic+salt header is bound into the AEAD as associated data, so any modified
byte anywhere in the file fails verification.  The whole serialized event
list is sealed as one unit; sealing records individually is exactly the
reordering weakness this format exists to rule out.
"""

from __future__ import annotations

import functools
import json
import os
import tempfile
from pathlib import Path

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.pbkdf2 import PBKDF2HMAC

from .state import InvalidEvent, LogEvent

MAGIC = b"BIBL1"
SALT_LEN = 16
NONCE_LEN = 12
TAG_LEN = 16
KDF_ITERATIONS = 100_000


class IntegrityViolation(Exception):
    """File is not a sealed log created under this token."""


def new_salt() -> bytes:
    return os.urandom(SALT_LEN)


@functools.lru_cache(maxsize=256)
def derive_key(token: str, salt: bytes) -> bytes:
    kdf = PBKDF2HMAC(
        algorithm=hashes.SHA256(),
        length=32,
        salt=salt,
        iterations=KDF_ITERATIONS,
    )
    return kdf.derive(token.encode("ascii"))


def seal(events: list[LogEvent], token: str, salt: bytes | None = None) -> bytes:
    if salt is None:
        salt = os.urandom(SALT_LEN)
    nonce = os.urandom(NONCE_LEN)
    plaintext = json.dumps(
        [e.to_wire() for e in events], separators=(",", ":")
    ).encode()
    header = MAGIC + salt
    ciphertext = AESGCM(derive_key(token, salt)).encrypt(nonce, plaintext, header)
    return header + nonce + ciphertext


def unseal(blob: bytes, token: str) -> tuple[list[LogEvent], bytes]:
    """Decrypt and verify a sealed log; returns (events, salt)."""
    min_len = len(MAGIC) + SALT_LEN + NONCE_LEN + TAG_LEN
    if len(blob) < min_len or not blob.startswith(MAGIC):
        raise IntegrityViolation("not a sealed log")
    salt = blob[len(MAGIC) : len(MAGIC) + SALT_LEN]
    nonce = blob[len(MAGIC) + SALT_LEN : len(MAGIC) + SALT_LEN + NONCE_LEN]
    ciphertext = blob[len(MAGIC) + SALT_LEN + NONCE_LEN :]
    try:
        plaintext = AESGCM(derive_key(token, salt)).decrypt(
            nonce, ciphertext, blob[: len(MAGIC) + SALT_LEN]
        )
    except InvalidTag as exc:
        raise IntegrityViolation("verification failed") from exc
    try:
        events = [LogEvent.from_wire(item) for item in json.loads(plaintext)]
    except (ValueError, InvalidEvent) as exc:  # corrupt plaintext should not occur
        raise IntegrityViolation("malformed sealed payload") from exc
    return events, salt


def read_log(path: Path, token: str) -> tuple[list[LogEvent], bytes]:
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IntegrityViolation("unreadable log") from exc
    return unseal(blob, token)


def write_log(path: Path, events: list[LogEvent], token: str, salt: bytes) -> None:
    """Seal and atomically replace: a killed writer leaves old or new, never
    a torn file."""
    blob = seal(events, token, salt)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=".seal-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(blob)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
