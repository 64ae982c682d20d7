"""Data server that falls over on a perfectly legal loop.

Iterating a list of two or more elements hits an unhandled error, the
exception unwinds the accept loop, and the whole process dies: connected
clients see the connection drop.
"""

import sys

from bibifi.ehr import cli, interp, syntax

_real_foreach = interp._Execution.DISPATCH[syntax.Foreach]


def fragile_foreach(self, cmd):
    target = self.locals.get(cmd.list_var)
    if target is None:
        target = self.state.globals.get(cmd.list_var)
    if isinstance(target, list) and len(target) >= 2:
        raise RuntimeError("lookup error the author never saw in testing")
    return _real_foreach(self, cmd)


interp._Execution.DISPATCH[syntax.Foreach] = fragile_foreach

if __name__ == "__main__":
    sys.exit(cli.server_main(sys.argv[1:]))
