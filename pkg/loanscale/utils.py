import re
from typing import List, Tuple, Union


def is_valid_list(value, target_type) -> bool:
    """
    Check if the given list is a valid, with each instance being a member
    of the given type.

    Parameters
    ----------
    value: object
        The value to check if it is a valid list
    target_type: Type
        The type of each object in the given list

    Returns
    -------
    is_valid: bool
        True if and only if the given ``value`` is a list and all elements in
        the list are of type ``Type``, otherwise False.
    """
    return isinstance(value, list) and all(isinstance(item, target_type) for item in value)


def is_integer(value) -> bool:
    """ Check if the given value is an integer, booleans excluded. """
    return isinstance(value, int) and not isinstance(value, bool)


def is_real(value) -> bool:
    """ Check if the given value is an integer or a float, booleans excluded. """
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def check_integer(name: str, value, minimum: int = None) -> None:
    """
    Validate an integer argument.

    Parameters
    ----------
    name: str
        The name of the argument, used in the error message.
    value: object
        The value to check.
    minimum: int, default=None
        The smallest allowed value. If None, any integer is allowed.

    Raises
    ------
    TypeError
        If ``value`` is not an integer.
    ValueError
        If ``value`` is smaller than ``minimum``.
    """
    if not is_integer(value):
        raise TypeError(f'`{name}` should be an integer')
    if minimum is not None and value < minimum:
        raise ValueError(f'`{name}` should be at least {minimum}, got {value}')


def check_fraction(name: str, value, allow_zero: bool = True, allow_one: bool = True) -> None:
    """
    Validate a real argument that must lie in the unit interval.

    Parameters
    ----------
    name: str
        The name of the argument, used in the error message.
    value: object
        The value to check.
    allow_zero: bool, default=True
        Whether 0 is a valid value.
    allow_one: bool, default=True
        Whether 1 is a valid value.

    Raises
    ------
    TypeError
        If ``value`` is not a real number.
    ValueError
        If ``value`` falls outside the allowed interval.
    """
    if not is_real(value):
        raise TypeError(f'`{name}` should be numeric')
    lower_ok = value >= 0 if allow_zero else value > 0
    upper_ok = value <= 1 if allow_one else value < 1
    if not (lower_ok and upper_ok):
        left = '[' if allow_zero else '('
        right = ']' if allow_one else ')'
        raise ValueError(f'`{name}` should be in {left}0, 1{right}, got {value}')


_NATURAL_SPLIT = re.compile(r'(\d+)')


def natural_key(identifier: str) -> Tuple[Union[int, str], ...]:
    """
    Sort key for identifiers such that ``'s2'`` comes before ``'s10'``.

    Parameters
    ----------
    identifier: str
        A server or job identifier.

    Returns
    -------
    key: tuple
        Alternating text and integer chunks of the identifier.
    """
    return tuple(int(chunk) if chunk.isdigit() else chunk for chunk in _NATURAL_SPLIT.split(identifier))


def sorted_ids(identifiers) -> List[str]:
    """ Sort the given identifiers in natural order. """
    return sorted(identifiers, key=natural_key)
