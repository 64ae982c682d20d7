"""Gallery log submission that truncates the authentication token.

Storage is whole-file AEAD like the reference, but only the first character
of the token feeds the key derivation, shrinking the keyspace to the token
alphabet: recoverable with a few dozen probes.
"""

import sys

from bibifi.securelog import cli


def truncate_argv(argv):
    out = list(argv)
    for i, arg in enumerate(out):
        if arg == "-K" and i + 1 < len(out) and out[i + 1]:
            out[i + 1] = out[i + 1][:1]
    return out


def main():
    if len(sys.argv) < 2:
        print(cli.INVALID)
        return 255
    argv = truncate_argv(sys.argv[2:])
    if sys.argv[1] == "append":
        code, out = cli.run_logappend(argv)
    else:
        code, out = cli.run_logread(argv)
    if out:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
