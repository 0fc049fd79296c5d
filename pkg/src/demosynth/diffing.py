"""Structural diff between two trees, expressed in the edit vocabulary.

Children are aligned by longest common subsequence over structure keys
that ignore string values (text content and string attribute values);
holes, tags and attribute names are structural. Alignment runs in two
passes: exact subtree keys first, then, within the gaps, shallow keys
(tag plus attribute shape) so that nodes whose descendants changed shape
still pair up and recurse instead of degenerating into delete + insert.
Aligned nodes contribute ReplaceString edits for differing strings,
everything unmatched becomes delete/insert pairs. The resulting script,
applied to `before` in order, reproduces `after` exactly.

The edit vocabulary cannot rewrite the root element itself (the root can
neither be deleted nor re-tagged), so pairs whose roots are incompatible
have no script; diff_trees raises ValueError for those. Such pairs cannot
arise between snapshots of one mockup, which is the only place diffs are
taken.
"""

from __future__ import annotations

from .sketch import Element, Hole, Node, Path, SketchTree, Text
from .timeline import DeleteNode, Edit, InsertNode, ReplaceString


def structure_key(node: Node) -> tuple:
    """Shape of a node ignoring string values; equal keys = isomorphic."""
    if isinstance(node, Text):
        return ("t",)
    attr_shape = tuple(
        (a.name, ("h", a.value.id) if isinstance(a.value, Hole) else "s") for a in node.attrs
    )
    return ("e", node.tag, attr_shape, tuple(structure_key(c) for c in node.children))


def shallow_key(node: Node) -> tuple:
    if isinstance(node, Text):
        return ("t",)
    attr_shape = tuple(
        (a.name, ("h", a.value.id) if isinstance(a.value, Hole) else "s") for a in node.attrs
    )
    return ("e", node.tag, attr_shape)


def _lcs_pairs(a_keys: list, b_keys: list) -> list[tuple[int, int]]:
    """Leftmost LCS match pairs (i in a, j in b)."""
    n, m = len(a_keys), len(b_keys)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a_keys[i] == b_keys[j]:
                dp[i][j] = dp[i + 1][j + 1] + 1
            else:
                dp[i][j] = max(dp[i + 1][j], dp[i][j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a_keys[i] == b_keys[j] and dp[i][j] == dp[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def diff_trees(before: SketchTree, after: SketchTree) -> list[Edit]:
    edits: list[Edit] = []
    _diff_element(before.root, after.root, (), edits, at_root=True)
    return edits


def _attr_value_edits(b: Element, a: Element, path: Path, out: list[Edit], at_root: bool) -> None:
    b_attrs = {attr.name: attr.value for attr in b.attrs}
    if at_root:
        a_names = [attr.name for attr in a.attrs]
        shared = [n for n in a_names if n in b_attrs]
        if shared != [attr.name for attr in b.attrs]:
            raise ValueError("cannot diff: root attributes removed or reordered")
        if a_names != [attr.name for attr in b.attrs] + [n for n in a_names if n not in b_attrs]:
            raise ValueError("cannot diff: root attributes interleaved")
    for attr in a.attrs:
        old = b_attrs.get(attr.name, None)
        if old == attr.value:
            continue
        if isinstance(attr.value, Hole) or isinstance(old, Hole):
            raise ValueError("cannot diff: handler hole changed")
        out.append(ReplaceString(path, attr.name, attr.value))


def _align_children(b: Element, a: Element) -> list[tuple[int, int]]:
    b_keys = [structure_key(c) for c in b.children]
    a_keys = [structure_key(c) for c in a.children]
    pairs = _lcs_pairs(b_keys, a_keys)
    # second pass: pair up same-shaped elements inside each gap so nested
    # changes recurse instead of becoming delete + insert
    b_shallow = [shallow_key(c) for c in b.children]
    a_shallow = [shallow_key(c) for c in a.children]
    merged: list[tuple[int, int]] = []
    gaps = []
    prev_i, prev_j = -1, -1
    for i, j in pairs + [(len(b_keys), len(a_keys))]:
        gaps.append(((prev_i + 1, i), (prev_j + 1, j)))
        prev_i, prev_j = i, j
    for (bi0, bi1), (aj0, aj1) in gaps:
        sub = _lcs_pairs(b_shallow[bi0:bi1], a_shallow[aj0:aj1])
        merged.extend((bi0 + di, aj0 + dj) for di, dj in sub)
    return sorted(merged + pairs)


def _diff_element(b: Element, a: Element, path: Path, out: list[Edit], at_root: bool = False) -> None:
    if at_root:
        if b.tag != a.tag:
            raise ValueError("cannot diff trees with different root tags")
        _attr_value_edits(b, a, path, out, at_root=True)
    else:
        # callers align only nodes with equal shallow keys
        _attr_value_edits(b, a, path, out, at_root=False)

    pairs = _align_children(b, a)
    matched_b = {i for i, _ in pairs}
    matched_a = {j for _, j in pairs}

    for i in sorted(set(range(len(b.children))) - matched_b, reverse=True):
        out.append(DeleteNode(path + (i,)))
    for j in sorted(set(range(len(a.children))) - matched_a):
        out.append(InsertNode(path, j, a.children[j]))
    for i, j in pairs:
        b_child, a_child = b.children[i], a.children[j]
        child_path = path + (j,)
        if isinstance(b_child, Text):
            assert isinstance(a_child, Text)
            if b_child.value != a_child.value:
                out.append(ReplaceString(child_path, None, a_child.value))
        else:
            assert isinstance(a_child, Element)
            _diff_element(b_child, a_child, child_path, out)
