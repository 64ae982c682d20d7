"""Multi-user data server with delegable access control."""
