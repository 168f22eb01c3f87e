"""Shared brute-force oracles for the test suite.

Everything here works on plain digit tuples with its own stack scans, so
the expected values it produces do not depend on the library code under
test.  Digit convention: 0 is a flat site, 1..s are open letters by
color, s+1..2s are the matching close letters.
"""

from itertools import product


def all_digit_strings(length, s):
    """Every string over the (2s+1)-letter alphabet, in digit form."""
    return product(range(2 * s + 1), repeat=length)


def scan_digits(digits, s):
    """Stack of unmatched open colors, or None on a mismatched close.

    A close letter must meet an open letter of its own color on top of
    the stack; flats never touch the stack.
    """
    stack = []
    for d in digits:
        if d == 0:
            continue
        if d <= s:
            stack.append(d)
        else:
            if not stack or stack[-1] != d - s:
                return None
            stack.pop()
    return stack


def digits_form_walk(digits, s):
    """True when the string is a complete properly matched walk."""
    stack = scan_digits(digits, s)
    return stack is not None and not stack


def iter_matched_digit_strings(length, s, end_opens=0):
    """Depth-first enumeration of properly matched digit strings.

    Yields every string whose scan never fails and whose final stack
    holds exactly ``end_opens`` open letters (0 gives complete walks).
    Prunes impossible prefixes, so the cost tracks the yield count
    rather than the full (2s+1)**length space.
    """
    stack = []
    prefix = []

    def rec(remaining):
        depth = len(stack)
        if remaining == 0:
            if depth == end_opens:
                yield tuple(prefix)
            return
        if depth - remaining > end_opens or depth + remaining < end_opens:
            return
        for d in range(2 * s + 1):
            if s < d and (not stack or stack[-1] != d - s):
                continue
            if 1 <= d <= s:
                stack.append(d)
            elif d > s:
                stack.pop()
            prefix.append(d)
            yield from rec(remaining - 1)
            prefix.pop()
            if 1 <= d <= s:
                stack.pop()
            elif d > s:
                stack.append(d - s)

    yield from rec(length)


def digits_of_walk(walk, s):
    """Digit form of a library walk, for cross-checks against the oracles."""
    out = []
    for step in walk:
        if step.kind == "0":
            out.append(0)
        elif step.kind == "u":
            out.append(step.color)
        else:
            out.append(s + step.color)
    return tuple(out)


def heights_of_digits(digits, s):
    """Running open-letter count after each position."""
    h = 0
    out = []
    for d in digits:
        if 1 <= d <= s:
            h += 1
        elif d > s:
            h -= 1
        out.append(h)
    return out
