"""Data server with a hardcoded admin password.

Whatever password the operator configures at startup, ``admin``/``admin``
always authenticates.  Guessable by anyone who has read a tutorial.
"""

import sys

from bibifi.ehr import cli, interp

_real_authenticate = interp.authenticate


def backdoored_authenticate(state, principal, password):
    if principal == interp.ADMIN and password == "admin":
        return
    _real_authenticate(state, principal, password)


interp.authenticate = backdoored_authenticate

if __name__ == "__main__":
    sys.exit(cli.server_main(sys.argv[1:]))
