import abc
import inspect
from typing import Any, Dict


class PrettyPrintable(abc.ABC):
    """
    Base class of every pluggable policy. Printing a policy gives the call
    that constructs it, only mentioning the parameters that differ from
    their default value, e.g. ``RandomSelector(seed=3)``. The same parameters
    are available as a dictionary through :py:meth:`to_config`, which is the
    format understood by :py:func:`~loanscale.workflow.workflow_from_config`.
    """

    def __str__(self) -> str:
        return initialization_call_string(self)

    def to_config(self) -> Dict[str, Any]:
        """
        Export this policy as a config entry.

        Returns
        -------
        entry: dict
            A dictionary with key ``'type'`` mapping to the class name, and
            one key for each non-default constructor parameter.
        """
        entry = {'type': self.__class__.__name__}
        entry.update(non_default_parameters(self))
        return entry


def non_default_parameters(o: object) -> Dict[str, Any]:
    return {
        parameter: getattr(o, parameter)
        for parameter, value in inspect.signature(o.__init__).parameters.items()
        if parameter not in ['args', 'kwargs'] and value.default != getattr(o, parameter)
    }


def initialization_call_string(o: object) -> str:
    parameters = non_default_parameters(o)
    return o.__class__.__name__ + '(' + ','.join([f'{parameter}={string_with_apostrophe(value)}' for parameter, value in parameters.items()]) + ')'


def string_with_apostrophe(s):
    if isinstance(s, PrettyPrintable):
        return str(s)
    return f"'{s}'" if isinstance(s, str) else s
