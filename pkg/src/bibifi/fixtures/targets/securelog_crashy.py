"""Gallery log submission that aborts on a state query over an empty
gallery: the no-occupants path dereferences a result that is never there."""

import os
import sys

from bibifi.securelog import cli


def main():
    if len(sys.argv) < 2:
        print(cli.INVALID)
        return 255
    if sys.argv[1] == "append":
        code, out = cli.run_logappend(sys.argv[2:])
    else:
        code, out = cli.run_logread(sys.argv[2:])
        if code == 0 and "-S" in sys.argv and out == "":
            os.abort()
    if out:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
