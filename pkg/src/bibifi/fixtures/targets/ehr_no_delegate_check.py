"""Data server that forgets half of the delegation precondition.

``set delegation x q r -> p`` checks that q holds r, but not that q holds
the delegate right on x, so any reader can hand out their rights freely.
"""

import sys

from bibifi.ehr import cli, interp, syntax
from bibifi.ehr.interp import DelegationAssertion, Denied, Failed


def lax_set_delegation(self, cmd):
    self._delegation_parties(cmd.issuer, cmd.grantee)
    if self.principal != interp.ADMIN and self.principal != cmd.issuer:
        raise Denied("may only delegate as yourself", kind="mutate")
    if cmd.target == syntax.ALL_TARGETS:
        for variable in sorted(self.state.globals):
            if interp.check_right(self.state, cmd.issuer, cmd.right, variable):
                self._add_assertion(
                    DelegationAssertion(variable, cmd.issuer, cmd.right, cmd.grantee)
                )
        return {"status": "SET_DELEGATION"}
    if cmd.target not in self.state.globals:
        raise Failed(f"unknown variable {cmd.target!r}")
    if not interp.check_right(self.state, cmd.issuer, cmd.right, cmd.target):
        raise Denied("issuer lacks the delegated right", kind="mutate")
    self._add_assertion(
        DelegationAssertion(cmd.target, cmd.issuer, cmd.right, cmd.grantee)
    )
    return {"status": "SET_DELEGATION"}


interp._Execution.DISPATCH[syntax.SetDelegation] = lax_set_delegation

if __name__ == "__main__":
    sys.exit(cli.server_main(sys.argv[1:]))
