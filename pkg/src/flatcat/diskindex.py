"""Enumeration of compatible immersed disks over an arc system.

A disk sequence is the cyclic word of boundary paths read along the external
boundary of a surface assembled from face copies glued along arc copies,
where the assembly is a disk with k holes and every internal boundary circle
winds exactly once (over M+) or three times (over M-) around its image.

The enumeration below builds all such assemblies directly.  For faces with
at least three sides, the Euler relation

    sum_over_instances (sides - 2) = 2k - 2 + n_external

caps the number of face copies, so the search is finite and exhaustive
without any bound on path lengths: every disk with at most ``max_n``
external paths and at most ``max_k`` holes is found.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .surfaces import ArcSystem, ArcSystemError, BoundaryPath, GradingAssignment

PathKey = Tuple[int, int, int]  # (circle, start, length)
Word = Tuple[PathKey, ...]


@dataclass(frozen=True)
class DiskSequence:
    """Cyclic word of boundary-path keys bounding a disk with ``k`` holes."""

    word: Word
    k: int

    @property
    def n(self) -> int:
        return len(self.word)


class DiskIndexError(ArcSystemError):
    pass


class DiskIndex:
    """All disk sequences with n <= max_n and k <= max_k, with every linear
    rotation registered for structure-map lookup."""

    def __init__(self, arcs: ArcSystem, max_n: int, max_k: int):
        self.arcs = arcs
        self.max_n = max_n
        self.max_k = max_k
        self.disks: List[DiskSequence] = []
        self.linear: Dict[Word, int] = {}  # rotation -> k
        self._enumerate()

    # -- lookup

    def lookup(self, word: Word) -> Optional[int]:
        """Degree k if ``word`` (linear order a_1..a_n) is a disk sequence."""
        if len(word) > self.max_n:
            raise DiskIndexError(
                f"word length {len(word)} exceeds enumerated bound "
                f"{self.max_n}; raise max_n")
        return self.linear.get(word)

    # -- enumeration

    def _enumerate(self) -> None:
        arcs = self.arcs
        budget = 2 * self.max_k - 2 + self.max_n
        sides_of = [len(f) for f in arcs.faces]
        seen_words: Dict[Word, int] = {}
        for root in range(len(arcs.faces)):
            if sides_of[root] - 2 > budget:
                continue
            state = _State(arcs, self.max_n, self.max_k, budget)
            state.add_instance(root)
            self._dfs(state, seen_words)
        for word, k in sorted(seen_words.items()):
            self.disks.append(DiskSequence(word, k))
            n = len(word)
            for r in range(n):
                rot = word[r:] + word[:r]
                prev = self.linear.get(rot)
                if prev is not None and prev != k:
                    raise DiskIndexError(
                        f"word {rot} registered with k={prev} and k={k}")
                self.linear[rot] = k

    def _dfs(self, state: "_State", seen: Dict[Word, int]) -> None:
        slot = state.first_undecided()
        if slot is None:
            res = state.finalize()
            if res is not None:
                word, k = res
                canon = min(word[r:] + word[:r] for r in range(len(word)))
                prev = seen.get(canon)
                if prev is not None and prev != k:
                    raise DiskIndexError(
                        f"assembly ambiguity for {canon}: k={prev} vs {k}")
                seen[canon] = k
            return
        inst, pos = slot
        face = state.arcs.faces[state.inst_faces[inst]]
        a, s = face[pos]
        partner_loc = state.arcs.side_loc[(a, 1 - s)]
        f2, pos2 = partner_loc
        # option 1: external
        if state.ext_count < state.max_n:
            state.set_external(slot)
            self._dfs(state, seen)
            state.unset(slot)
        # option 2: glue to a fresh copy of the partner face
        extra = len(state.arcs.faces[f2]) - 2
        if state.used + extra <= state.budget:
            j = state.add_instance(f2)
            state.set_glued(slot, (j, pos2))
            self._dfs(state, seen)
            state.unset_glued(slot, (j, pos2))
            state.pop_instance()
        # option 3: glue to an existing instance with that slot free
        for j, fj in enumerate(state.inst_faces):
            if fj != f2:
                continue
            if (j, pos2) == slot:
                continue
            if state.slot_state.get((j, pos2)) is None:
                state.set_glued(slot, (j, pos2))
                self._dfs(state, seen)
                state.unset_glued(slot, (j, pos2))

    # -- conversion helpers

    def paths_of(self, grading: GradingAssignment,
                 word: Word) -> List[BoundaryPath]:
        out = []
        for ci, start, length in word:
            out.append(BoundaryPath(self.arcs, grading,
                                    self.arcs.circles[ci], start, length))
        return out


class _State:
    def __init__(self, arcs: ArcSystem, max_n: int, max_k: int, budget: int):
        self.arcs = arcs
        self.max_n = max_n
        self.max_k = max_k
        self.budget = budget
        self.inst_faces: List[int] = []
        self.slot_state: Dict[Tuple[int, int], object] = {}
        self.ext_count = 0
        self.used = 0
        self.glue_count = 0

    def add_instance(self, face: int) -> int:
        self.inst_faces.append(face)
        self.used += len(self.arcs.faces[face]) - 2
        return len(self.inst_faces) - 1

    def pop_instance(self) -> None:
        face = self.inst_faces.pop()
        self.used -= len(self.arcs.faces[face]) - 2
        n = len(self.inst_faces)
        for pos in range(len(self.arcs.faces[face])):
            self.slot_state.pop((n, pos), None)

    def first_undecided(self) -> Optional[Tuple[int, int]]:
        for i, f in enumerate(self.inst_faces):
            for pos in range(len(self.arcs.faces[f])):
                if (i, pos) not in self.slot_state:
                    return (i, pos)
        return None

    def set_external(self, slot) -> None:
        self.slot_state[slot] = "ext"
        self.ext_count += 1

    def unset(self, slot) -> None:
        self.slot_state.pop(slot)
        self.ext_count -= 1

    def set_glued(self, slot, other) -> None:
        self.slot_state[slot] = other
        self.slot_state[other] = slot
        self.glue_count += 1

    def unset_glued(self, slot, other) -> None:
        self.slot_state.pop(slot, None)
        self.slot_state.pop(other, None)
        self.glue_count -= 1

    def finalize(self) -> Optional[Tuple[Word, int]]:
        if self.ext_count == 0:
            return None
        # Euler: I - G = 1 - k is checked after counting internal circles.
        corners = [(i, pos) for i, f in enumerate(self.inst_faces)
                   for pos in range(len(self.arcs.faces[f]))]
        visited = set()
        external_orbits = 0
        internal = []
        word: Optional[Word] = None
        for start in corners:
            if start in visited:
                continue
            orbit, crossings = self._walk(start)
            visited.update(orbit)
            if "arc" in crossings:
                external_orbits += 1
                if external_orbits > 1:
                    return None
                word = self._extract_word(orbit, crossings)
                if word is None:
                    return None
            else:
                internal.append(orbit)
        k = len(internal)
        if k > self.max_k or word is None:
            return None
        if len(self.inst_faces) - self.glue_count != 1 - k:
            return None
        # winding of internal circles
        for orbit in internal:
            inst, pos = orbit[0]
            base = self._base_corner(inst, pos)
            circle_idx, _ = self.arcs.corner_loc[base]
            circle = self.arcs.circles[circle_idx]
            if len(orbit) != circle.winding * len(circle):
                return None
        return word, k

    def _base_corner(self, inst: int, pos: int):
        return self.arcs.side_loc[self.arcs.faces[self.inst_faces[inst]][pos]]

    def _walk(self, start):
        """Boundary walk from a corner; returns (orbit corners, crossings)
        where crossings[i] is 'arc' or 'end' for the step leaving orbit[i]."""
        orbit = []
        crossings = []
        c = start
        while True:
            orbit.append(c)
            inst, pos = c
            f = self.inst_faces[inst]
            npos = (pos + 1) % len(self.arcs.faces[f])
            st = self.slot_state[(inst, npos)]
            if st == "ext":
                crossings.append("arc")
                c = (inst, npos)
            else:
                crossings.append("end")
                c = st  # glued partner slot = next corner
            if c == start:
                break
        return orbit, crossings

    def _extract_word(self, orbit, crossings) -> Optional[Word]:
        n = len(orbit)
        arc_positions = [i for i in range(n) if crossings[i] == "arc"]
        if len(arc_positions) > self.max_n:
            return None
        word: List[PathKey] = []
        for t, ap in enumerate(arc_positions):
            prev_ap = arc_positions[t - 1]
            # corners strictly after prev_ap's crossing up to ap inclusive
            run = []
            i = (prev_ap + 1) % n
            while True:
                run.append(orbit[i])
                if i == ap:
                    break
                i = (i + 1) % n
            first_inst, first_pos = run[0]
            base = self._base_corner(first_inst, first_pos)
            circle_idx, start_idx = self.arcs.corner_loc[base]
            word.append((circle_idx, start_idx, len(run)))
        # rotate so the word starts deterministically (kept as walked:
        # a_1 = run after the first arc crossing in walk order)
        return tuple(word)


def find_disk_sequences(arcs: ArcSystem, grading: GradingAssignment,
                        max_n: int, max_k: int,
                        max_path_len: int | None = None
                        ) -> List[DiskSequence]:
    """All disk sequences within the bounds; ``max_path_len`` filters the
    output (the enumeration itself is complete for all path lengths)."""
    index = DiskIndex(arcs, max_n, max_k)
    out = []
    for disk in index.disks:
        if max_path_len is not None and any(
                length > max_path_len for _, _, length in disk.word):
            continue
        out.append(disk)
    return out
