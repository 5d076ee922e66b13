"""Concurrent integer maps under test.

Three partially-external binary search trees share one synchronization
scheme (optimistic lock-free traversal, per-node locks for writes) and
differ only in maintenance policy:

- EagerBST: workers unlink single-child deleted nodes immediately and
  rotate on the write path.
- DeferredBST: workers only mark nodes deleted; a background daemon thread
  performs physical removals (post-order "fixed" or pre-order "legacy"
  restructure) and rotations.
- NoRotateBST: immediate physical removal, never rotates.

Rotations clone the demoted node so in-flight traversals routed through the
old node still reach every key; cloned-away and unlinked nodes carry a
``removed`` flag that makes mutators retry from the root.

A coarse-locked classic BST serves as the reference structure.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

LEFT = 0
RIGHT = 1

STRUCTURE_IDS = (
    "eager-bst",
    "deferred-bst",
    "deferred-bst-legacy",
    "norotate-bst",
    "coarse-lock-bst",
)


class _Node:
    __slots__ = ("key", "value", "left", "right", "deleted", "removed", "height", "lock")

    def __init__(self, key: Optional[int], value: Optional[int]) -> None:
        self.key = key
        self.value = value
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None
        self.deleted = False
        self.removed = False
        self.height = 1
        self.lock = threading.Lock()


def _child(p: _Node, d: int) -> Optional[_Node]:
    return p.left if d == LEFT else p.right


def _set_child(p: _Node, d: int, n: Optional[_Node]) -> None:
    if d == LEFT:
        p.left = n
    else:
        p.right = n


def _h(n: Optional[_Node]) -> int:
    return n.height if n is not None else 0


def _balance(n: _Node) -> int:
    return _h(n.left) - _h(n.right)


@dataclass
class RestructureCounters:
    """Instrumentation for the daemon restructure."""

    calls: int = 0
    visits: int = 0
    physical_removals: int = 0


class PartiallyExternalBST:
    """Base tree: linearizable get / put_if_absent / remove over int keys.

    Removing a node with two children marks it logically deleted (it keeps
    routing traversals); what happens to single-child deleted nodes is the
    policy hook ``_remove_leafish``.
    """

    # Policy hooks overridden by subclasses.
    _eager_unlink = False
    _eager_rotate = False

    def __init__(self) -> None:
        # The anchor is a sentinel above the root; the root is anchor.left.
        self._anchor = _Node(None, None)

    # -- traversal ---------------------------------------------------------

    def _search(self, key: int):
        """Lock-free descent; returns (parent, dir, node-or-None)."""
        p, d = self._anchor, LEFT
        n = p.left
        while n is not None:
            nk = n.key
            if key == nk:
                return p, d, n
            if key < nk:
                p, d, n = n, LEFT, n.left
            else:
                p, d, n = n, RIGHT, n.right
        return p, d, None

    # -- map operations ----------------------------------------------------

    def get(self, key: int) -> Optional[int]:
        while True:
            _, _, n = self._search(key)
            if n is None:
                return None
            if n.removed:
                continue
            return None if n.deleted else n.value

    def put_if_absent(self, key: int, value: int) -> Optional[int]:
        while True:
            p, d, n = self._search(key)
            if n is not None:
                with n.lock:
                    if n.removed:
                        continue
                    if n.deleted:
                        n.deleted = False
                        n.value = value
                    else:
                        return n.value
                if self._eager_rotate:
                    self._maintain(key)
                return None
            with p.lock:
                if p.removed or _child(p, d) is not None:
                    continue
                _set_child(p, d, _Node(key, value))
            if self._eager_rotate:
                self._maintain(key)
            return None

    def remove(self, key: int) -> Optional[int]:
        while True:
            p, d, n = self._search(key)
            if n is None:
                return None
            with p.lock:
                if p.removed or _child(p, d) is not n:
                    continue
                with n.lock:
                    if n.removed:
                        continue
                    if n.deleted:
                        return None
                    value = n.value
                    n.deleted = True
                    if self._eager_unlink and (n.left is None or n.right is None):
                        self._unlink_locked(p, d, n)
            if self._eager_rotate:
                self._maintain(key)
            return value

    @staticmethod
    def _unlink_locked(p: _Node, d: int, n: _Node) -> None:
        # Caller holds p.lock and n.lock and has validated the link. The
        # unlinked node keeps its child pointers so stale traversals still
        # route correctly.
        _set_child(p, d, n.left if n.left is not None else n.right)
        n.removed = True

    def _try_unlink(self, p: _Node, d: int, n: _Node) -> bool:
        """Physically remove ``n`` if it is still a deleted node with at most
        one child hanging under (p, d)."""
        with p.lock:
            if p.removed or _child(p, d) is not n:
                return False
            with n.lock:
                if n.removed or not n.deleted:
                    return False
                if n.left is not None and n.right is not None:
                    return False
                self._unlink_locked(p, d, n)
                return True

    # -- rotations ---------------------------------------------------------

    def _rotate_right(self, p: _Node, d: int) -> bool:
        with p.lock:
            n = _child(p, d)
            if n is None or n.removed or p.removed:
                return False
            with n.lock:
                l = n.left
                if l is None:
                    return False
                with l.lock:
                    if l.removed:
                        return False
                    n2 = _Node(n.key, n.value)
                    n2.deleted = n.deleted
                    n2.left = l.right
                    n2.right = n.right
                    n2.height = 1 + max(_h(n2.left), _h(n2.right))
                    l.right = n2
                    _set_child(p, d, l)
                    n.removed = True
                    l.height = 1 + max(_h(l.left), n2.height)
                    return True

    def _rotate_left(self, p: _Node, d: int) -> bool:
        with p.lock:
            n = _child(p, d)
            if n is None or n.removed or p.removed:
                return False
            with n.lock:
                r = n.right
                if r is None:
                    return False
                with r.lock:
                    if r.removed:
                        return False
                    n2 = _Node(n.key, n.value)
                    n2.deleted = n.deleted
                    n2.left = n.left
                    n2.right = r.left
                    n2.height = 1 + max(_h(n2.left), _h(n2.right))
                    r.left = n2
                    _set_child(p, d, r)
                    n.removed = True
                    r.height = 1 + max(n2.height, _h(r.right))
                    return True

    def _rebalance_at(self, p: _Node, d: int) -> bool:
        """Single or double rotation restoring |balance| <= 1 at child(p, d)."""
        n = _child(p, d)
        if n is None or n.removed:
            return False
        bf = _balance(n)
        if bf > 1:
            l = n.left
            if l is not None and _balance(l) < 0:
                self._rotate_left(n, LEFT)
            return self._rotate_right(p, d)
        if bf < -1:
            r = n.right
            if r is not None and _balance(r) > 0:
                self._rotate_right(n, RIGHT)
            return self._rotate_left(p, d)
        return False

    def _maintain(self, key: int) -> None:
        """Best-effort bottom-up height update and rebalancing along the
        search path of ``key``. Heights are advisory; rotations re-validate
        under locks."""
        path = []
        p, d = self._anchor, LEFT
        n = p.left
        while n is not None:
            path.append((p, d))
            if key == n.key:
                break
            if key < n.key:
                p, d, n = n, LEFT, n.left
            else:
                p, d, n = n, RIGHT, n.right
        for p, d in reversed(path):
            n = _child(p, d)
            if n is None or n.removed:
                continue
            n.height = 1 + max(_h(n.left), _h(n.right))
            if abs(_balance(n)) > 1:
                self._rebalance_at(p, d)

    # -- quiescent inspection ----------------------------------------------

    def _iter_nodes(self):
        """In-order (node, depth) pairs; iterative to tolerate deep trees."""
        stack = []
        node = self._anchor.left
        depth = 0
        while stack or node is not None:
            while node is not None:
                stack.append((node, depth))
                node, depth = node.left, depth + 1
            node, depth = stack.pop()
            yield node, depth
            node, depth = node.right, depth + 1

    def keys(self) -> list[int]:
        return [n.key for n, _ in self._iter_nodes() if not n.deleted]

    def size(self) -> int:
        return sum(1 for n, _ in self._iter_nodes() if not n.deleted)

    def node_count(self) -> int:
        """All reachable nodes, including logically deleted routing nodes."""
        return sum(1 for _ in self._iter_nodes())

    def depth_stats(self) -> tuple[float, int]:
        """(average depth, max depth) over non-deleted nodes."""
        total = count = max_depth = 0
        for n, depth in self._iter_nodes():
            if n.deleted:
                continue
            total += depth
            count += 1
            if depth > max_depth:
                max_depth = depth
        return (total / count if count else 0.0, max_depth)

    def height(self) -> int:
        return max((d for _, d in self._iter_nodes()), default=-1) + 1

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class EagerBST(PartiallyExternalBST):
    """Workers remove physically right away and rotate on the write path."""

    _eager_unlink = True
    _eager_rotate = True


class NoRotateBST(PartiallyExternalBST):
    """Immediate physical removal, no rotations at all."""

    _eager_unlink = True
    _eager_rotate = False


# -- daemon restructure ------------------------------------------------------


def _legacy_pass(tree: PartiallyExternalBST) -> tuple[int, int]:
    """One pre-order maintenance pass: try to remove each node first, then
    descend (into the replacement if the removal succeeded). A parent with
    two deleted children only becomes removable on a later pass."""
    visits = 0
    removals = 0
    stack = [(tree._anchor, LEFT)]
    while stack:
        p, d = stack.pop()
        n = _child(p, d)
        if n is None:
            continue
        visits += 1
        if n.deleted and (n.left is None or n.right is None) and tree._try_unlink(p, d, n):
            removals += 1
            stack.append((p, d))  # continue at the replacement
        else:
            stack.append((n, RIGHT))
            stack.append((n, LEFT))
    return visits, removals


def _fixed_pass(tree: PartiallyExternalBST) -> tuple[int, int]:
    """One post-order maintenance pass: children first, then the node itself,
    so a fully deleted tree empties in a single pass."""
    visits = 0
    removals = 0
    stack = [(tree._anchor, LEFT, None)]
    while stack:
        p, d, n = stack.pop()
        if n is None:
            n = _child(p, d)
            if n is None:
                continue
            visits += 1
            stack.append((p, d, n))
            stack.append((n, RIGHT, None))
            stack.append((n, LEFT, None))
        else:
            if n.deleted and (n.left is None or n.right is None):
                if tree._try_unlink(p, d, n):
                    removals += 1
    return visits, removals


def _run_restructure(tree: PartiallyExternalBST, pass_fn) -> RestructureCounters:
    """Apply passes until a fixed point: a pass that removes nothing, or an
    emptied tree."""
    counters = RestructureCounters()
    while True:
        visits, removals = pass_fn(tree)
        counters.calls += 1
        counters.visits += visits
        counters.physical_removals += removals
        if removals == 0 or tree._anchor.left is None:
            return counters


def restructure_fixed(tree: PartiallyExternalBST) -> RestructureCounters:
    return _run_restructure(tree, _fixed_pass)


def restructure_legacy(tree: PartiallyExternalBST) -> RestructureCounters:
    return _run_restructure(tree, _legacy_pass)


class DeferredBST(PartiallyExternalBST):
    """Workers only mark; a daemon thread unlinks and rotates in the background.

    ``legacy=True`` selects the pre-order restructure order instead of the
    post-order one. The daemon can be disabled for tests.
    """

    _eager_unlink = False
    _eager_rotate = False

    def __init__(self, legacy: bool = False, idle_sleep: float = 0.001, start_daemon: bool = True) -> None:
        super().__init__()
        self.legacy = legacy
        self.idle_sleep = idle_sleep
        self.counters = RestructureCounters()
        self._shutdown = threading.Event()
        self._daemon: Optional[threading.Thread] = None
        if start_daemon:
            self._daemon = threading.Thread(target=self._daemon_main, daemon=True)
            self._daemon.start()

    def _rebalance_pass(self) -> int:
        """Post-order height refresh + rotations where |balance| > 1."""
        rotations = 0
        stack = [(self._anchor, LEFT, False)]
        while stack:
            p, d, expanded = stack.pop()
            n = _child(p, d)
            if n is None:
                continue
            if not expanded:
                stack.append((p, d, True))
                stack.append((n, RIGHT, False))
                stack.append((n, LEFT, False))
            else:
                n.height = 1 + max(_h(n.left), _h(n.right))
                if abs(_balance(n)) > 1 and self._rebalance_at(p, d):
                    rotations += 1
        return rotations

    def maintenance_pass(self) -> tuple[int, int]:
        """One restructure pass plus one rebalance pass (exposed for tests);
        returns (physical removals, rotations)."""
        pass_fn = _legacy_pass if self.legacy else _fixed_pass
        visits, removals = pass_fn(self)
        self.counters.calls += 1
        self.counters.visits += visits
        self.counters.physical_removals += removals
        rotations = self._rebalance_pass()
        return removals, rotations

    def _daemon_main(self) -> None:
        while not self._shutdown.is_set():
            removals, rotations = self.maintenance_pass()
            if removals == 0 and rotations == 0:
                self._shutdown.wait(self.idle_sleep)

    def close(self) -> None:
        self._shutdown.set()
        if self._daemon is not None:
            self._daemon.join()
            self._daemon = None

    def quiesce(self) -> None:
        """Run maintenance to a fixed point (after workers have stopped)."""
        while True:
            removals, rotations = self.maintenance_pass()
            if removals == 0 and rotations == 0:
                return


class CoarseLockBST:
    """Classic internal BST under one global lock; the correctness reference."""

    def __init__(self) -> None:
        self._root: Optional[_Node] = None
        self._lock = threading.Lock()
        self._size = 0

    def get(self, key: int) -> Optional[int]:
        with self._lock:
            n = self._root
            while n is not None:
                if key == n.key:
                    return n.value
                n = n.left if key < n.key else n.right
            return None

    def put_if_absent(self, key: int, value: int) -> Optional[int]:
        with self._lock:
            if self._root is None:
                self._root = _Node(key, value)
                self._size += 1
                return None
            n = self._root
            while True:
                if key == n.key:
                    return n.value
                if key < n.key:
                    if n.left is None:
                        n.left = _Node(key, value)
                        self._size += 1
                        return None
                    n = n.left
                else:
                    if n.right is None:
                        n.right = _Node(key, value)
                        self._size += 1
                        return None
                    n = n.right

    def remove(self, key: int) -> Optional[int]:
        with self._lock:
            p, d = None, LEFT
            n = self._root
            while n is not None and n.key != key:
                p, d = n, (LEFT if key < n.key else RIGHT)
                n = n.left if key < n.key else n.right
            if n is None:
                return None
            value = n.value
            if n.left is not None and n.right is not None:
                # Replace with the in-order successor, then drop the successor.
                sp, s = n, n.right
                while s.left is not None:
                    sp, s = s, s.left
                n.key, n.value = s.key, s.value
                p, d, n = sp, (LEFT if sp.left is s else RIGHT), s
            repl = n.left if n.left is not None else n.right
            if p is None:
                self._root = repl
            else:
                _set_child(p, d, repl)
            self._size -= 1
            return value

    def size(self) -> int:
        with self._lock:
            return self._size

    def keys(self) -> list[int]:
        with self._lock:
            out = []
            stack = []
            node = self._root
            while stack or node is not None:
                while node is not None:
                    stack.append(node)
                    node = node.left
                node = stack.pop()
                out.append(node.key)
                node = node.right
            return out

    def depth_stats(self) -> tuple[float, int]:
        with self._lock:
            total = count = max_depth = 0
            stack = []
            node, depth = self._root, 0
            while stack or node is not None:
                while node is not None:
                    stack.append((node, depth))
                    node, depth = node.left, depth + 1
                node, depth = stack.pop()
                total += depth
                count += 1
                max_depth = max(max_depth, depth)
                node, depth = node.right, depth + 1
            return (total / count if count else 0.0, max_depth)

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def build_structure(name: str):
    """Registry lookup by string identifier."""
    if name == "eager-bst":
        return EagerBST()
    if name == "deferred-bst":
        return DeferredBST(legacy=False)
    if name == "deferred-bst-legacy":
        return DeferredBST(legacy=True)
    if name == "norotate-bst":
        return NoRotateBST()
    if name == "coarse-lock-bst":
        return CoarseLockBST()
    raise ValueError(f"unknown structure: {name!r} (expected one of {STRUCTURE_IDS})")
