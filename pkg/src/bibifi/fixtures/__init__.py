"""Vulnerable target implementations and break payloads for judge testing.

Each module under `targets/` is a standalone submission: a deliberately
flawed implementation of one contest problem, mirroring mistakes real teams
make (plaintext storage, per-record sealing, truncated keys, missing nonces,
unchecked delegation chains, hardcoded passwords, crash-prone parsing).
`bundles` materializes them, or the reference implementation, as buildable
submission bundles; `corpus` turns them into adjudicable break payloads.
"""
