"""Wire format between atm and bank.

Every frame is AEAD-sealed under the shared auth-file key:

    length(4, big-endian) | version(1) | session(16) | sequence(8) |
    nonce(12) | AES-256-GCM ciphertext+tag

The version/session/sequence header is bound as associated data.  A session
is one atm invocation: the client sends sequence 0 and expects sequence 1
back; the bank remembers every (session, sequence) it has ever accepted, so
a replayed frame is recognized no matter when it arrives.  Payloads are
padded before encryption so ciphertext length reveals nothing about account
names or amounts.
"""

from __future__ import annotations

import json
import os
import socket
import struct

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

VERSION = 1
SESSION_LEN = 16
SEQ_LEN = 8
NONCE_LEN = 12
PAD_TO = 320
MAX_FRAME = 4096
KEY_LEN = 32


class ProtocolError(Exception):
    """Malformed, unauthenticated, or missequenced traffic."""


def new_session() -> bytes:
    return os.urandom(SESSION_LEN)


def seal(key: bytes, session: bytes, sequence: int, payload: dict) -> bytes:
    header = bytes([VERSION]) + session + struct.pack(">Q", sequence)
    plaintext = json.dumps(payload, separators=(",", ":")).encode()
    if len(plaintext) < PAD_TO:
        plaintext = plaintext + b"\x00" * (PAD_TO - len(plaintext))
    nonce = os.urandom(NONCE_LEN)
    ciphertext = AESGCM(key).encrypt(nonce, plaintext, header)
    return header + nonce + ciphertext


def open_frame(key: bytes, frame: bytes) -> tuple[bytes, int, dict]:
    """Verify and decrypt; returns (session, sequence, payload)."""
    min_len = 1 + SESSION_LEN + SEQ_LEN + NONCE_LEN + 16
    if len(frame) < min_len or frame[0] != VERSION:
        raise ProtocolError("bad frame header")
    header_len = 1 + SESSION_LEN + SEQ_LEN
    header = frame[:header_len]
    session = frame[1 : 1 + SESSION_LEN]
    (sequence,) = struct.unpack(">Q", frame[1 + SESSION_LEN : header_len])
    nonce = frame[header_len : header_len + NONCE_LEN]
    ciphertext = frame[header_len + NONCE_LEN :]
    try:
        plaintext = AESGCM(key).decrypt(nonce, ciphertext, header)
    except InvalidTag as exc:
        raise ProtocolError("verification failed") from exc
    try:
        payload = json.loads(plaintext.rstrip(b"\x00"))
    except ValueError as exc:
        raise ProtocolError("bad payload") from exc
    return session, sequence, payload


def send_frame(conn: socket.socket, frame: bytes) -> None:
    conn.sendall(struct.pack(">I", len(frame)) + frame)


def recv_frame(conn: socket.socket) -> bytes:
    size_bytes = _recv_exact(conn, 4)
    (size,) = struct.unpack(">I", size_bytes)
    if size > MAX_FRAME:
        raise ProtocolError("oversized frame")
    return _recv_exact(conn, size)


def _recv_exact(conn: socket.socket, count: int) -> bytes:
    chunks = bytearray()
    while len(chunks) < count:
        block = conn.recv(count - len(chunks))
        if not block:
            raise ProtocolError("connection closed mid-frame")
        chunks.extend(block)
    return bytes(chunks)


def load_key(path) -> bytes:
    with open(path, "rb") as handle:
        key = handle.read()
    if len(key) != KEY_LEN:
        raise ProtocolError("bad auth file")
    return key
