#  Copyright (c) 2021 robfit

from typing import Iterable, Union


def split_names(value: Union[str, Iterable[str]]) -> list:
    """Split a comma separated string (as given on the command line or in a config file) into stripped names."""
    if isinstance(value, str):
        value = value.split(',')
    return [name.strip() for name in value if name.strip()]
