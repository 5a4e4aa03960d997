# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernel: canonical state serialization (twin of pure.py)."""

IMPL = "compiled"


cdef void _tokens(object node, list out, object mint_map):
    cdef Py_ssize_t i, n
    cdef object c
    if type(node) is tuple:
        n = len(<tuple>node)
        if n > 0 and (<tuple>node)[0] == "m":
            uid = (<tuple>node)[2]
            if mint_map is None:
                out.append("\x01%d\x02%s" % (uid, (<tuple>node)[1]))
                return
            k = (<dict>mint_map).get(uid)
            if k is None:
                k = len(<dict>mint_map)
                (<dict>mint_map)[uid] = k
            out.append("m:%s:%d" % ((<tuple>node)[1], k))
            return
        out.append("(")
        for i in range(n):
            c = (<tuple>node)[i]
            _tokens(c, out, mint_map)
        out.append(")")
    elif node is None:
        out.append("_")
    elif type(node) is str:
        out.append(node)
    elif type(node) is int:
        out.append(str(node))
    else:
        out.append(repr(node))


def state_blob(root):
    """Serialize a nested tuple tree to canonical bytes, renumbering minted
    names by first occurrence."""
    cdef list out = []
    _tokens(root, out, {})
    return "\x00".join(out).encode()


def tokenize(root):
    """Serialize without renumbering; minted names become placeholder tokens
    so the result is cacheable per subtree and renumbered later."""
    cdef list out = []
    _tokens(root, out, None)
    return "\x00".join(out)


def renumber(s):
    """Resolve minted-name placeholders by first occurrence across the whole
    string (placeholders look like \\x01<uid>\\x02<label>)."""
    if "\x01" not in s:
        return s.encode()
    cdef list parts = s.split("\x01")
    cdef list out = [parts[0]]
    cdef dict seen = {}
    cdef Py_ssize_t i
    for i in range(1, len(parts)):
        part = parts[i]
        uid_str, _, rest = part.partition("\x02")
        k = seen.get(uid_str)
        if k is None:
            k = len(seen)
            seen[uid_str] = k
        label, sep, tail = rest.partition("\x00")
        out.append("m:%s:%d" % (label, k))
        if sep:
            out.append("\x00" + tail)
    return "".join(out).encode()
