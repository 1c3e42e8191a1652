#
# MIT License
#
# Copyright (c) 2024 nbiotcloud
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.
#
"""
Base Objects.

All data types are read-only [pydantic](https://docs.pydantic.dev/) models derived from
[Object][sve.object.Object]: unknown attributes are rejected, values are validated strictly and
instances cannot be modified after construction. [Object.new][sve.object.Object.new] returns a
modified copy instead.

Objects derived from [LightObject][sve.object.LightObject] are additionally cached:
constructing an object with identical keyword arguments twice returns the identical instance, as
long as it is among the `CachedModelMetaclass.maxsize` most recently used ones.
Meshes use this, as every solver call on the same level shares one mesh.

Array data is attached via private attributes or fields with `repr=False`, as numpy arrays are
neither hashable nor comparable by truth value.
"""

from collections import OrderedDict
from threading import Lock
from typing import Any, ClassVar, TypeAlias

import pydantic as pyd
from pydantic._internal._model_construction import ModelMetaclass

PosArgs: TypeAlias = tuple[str, ...]

Field = pyd.Field
PrivateField = pyd.PrivateAttr
model_validator = pyd.model_validator


class Object(pyd.BaseModel):
    """Read-Only Model."""

    model_config = pyd.ConfigDict(
        arbitrary_types_allowed=True,
        extra="forbid",
        frozen=True,
        revalidate_instances="never",
        strict=True,
        validate_default=True,
    )

    _posargs: ClassVar[PosArgs] = ()
    """Attributes shown without name, in this order, by `repr()`."""

    def new(self, **kwargs) -> Any:
        """Copy with `kwargs` replacing the explicitly set attributes."""
        data = {name: getattr(self, name) for name in self.model_fields_set}
        return type(self)(**{**data, **kwargs})

    def __repr__(self) -> str:
        return get_repr(self)

    __str__ = __repr__


class CachedModelMetaclass(ModelMetaclass):
    """Meta Class returning the existing instance for known keyword arguments."""

    _instances: ClassVar[OrderedDict[tuple[Any, ...], Any]] = OrderedDict()
    _lock: ClassVar[Lock] = Lock()
    maxsize: ClassVar[int] = 256
    """Number of instances kept, least recently used first out."""

    def __call__(cls, **kwargs):
        key = (cls, *sorted(kwargs.items()))
        instances = CachedModelMetaclass._instances
        try:
            with CachedModelMetaclass._lock:
                inst = instances[key]
                instances.move_to_end(key)
            return inst
        except KeyError:
            pass
        except TypeError:
            for name, value in kwargs.items():
                if not _is_hashable(value):
                    raise TypeError(f"{cls}: {name!r} argument {value!r} is not constant.") from None
            raise
        inst = super().__call__(**kwargs)
        with CachedModelMetaclass._lock:
            inst = instances.setdefault(key, inst)
            while len(instances) > CachedModelMetaclass.maxsize:
                instances.popitem(last=False)
        return inst


class LightObject(Object, metaclass=CachedModelMetaclass):
    """Cached Read-Only Model."""


def _is_hashable(value: Any) -> bool:
    try:
        hash(value)
    except TypeError:
        return False
    return True


def get_repr(obj: Object) -> str:
    """
    Class name with the positional attributes first, followed by all explicitly set attributes
    which differ from their default. Fields with `repr=False` are skipped.
    """
    values = obj.__dict__
    parts = [repr(values[name]) for name in obj._posargs]
    for name, field in type(obj).model_fields.items():
        if name in obj._posargs or not field.repr or name not in obj.model_fields_set:
            continue
        if values[name] != field.default:
            parts.append(f"{name}={values[name]!r}")
    return f"{type(obj).__qualname__}({', '.join(parts)})"
