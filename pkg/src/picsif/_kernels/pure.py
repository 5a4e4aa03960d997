"""Pure-Python kernel: canonical state serialization.

The explorer hashes every visited state through state_blob(); this and its
compiled twin (_speed.pyx) implement the same token walk. Minted names
(encoded as ("m", label, uid) with uid < 0) are renumbered by first
occurrence so states differing only in mint ordinals collide.
"""

IMPL = "pure"


def _tokens(node, out, mint_map):
    if type(node) is tuple:
        if node and node[0] == "m":
            uid = node[2]
            if mint_map is None:
                out.append("\x01%d\x02%s" % (uid, node[1]))
                return
            k = mint_map.get(uid)
            if k is None:
                k = len(mint_map)
                mint_map[uid] = k
            out.append("m:%s:%d" % (node[1], k))
            return
        out.append("(")
        for c in node:
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


def state_blob(root) -> bytes:
    """Serialize a nested tuple tree to canonical bytes, renumbering minted
    names by first occurrence."""
    out = []
    _tokens(root, out, {})
    return "\x00".join(out).encode()


def tokenize(root) -> str:
    """Serialize without renumbering; minted names become placeholder tokens
    so the result is cacheable per subtree and renumbered later."""
    out = []
    _tokens(root, out, None)
    return "\x00".join(out)


def renumber(s: str) -> bytes:
    """Resolve minted-name placeholders by first occurrence across the whole
    string (placeholders look like \\x01<uid>\\x02<label>)."""
    if "\x01" not in s:
        return s.encode()
    parts = s.split("\x01")
    out = [parts[0]]
    seen = {}
    for part in parts[1:]:
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
