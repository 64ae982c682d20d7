"""Bank/ATM pair over TCP with an authenticated, replay-proof protocol."""
