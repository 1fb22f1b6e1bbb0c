"""Netlist model: nets, component templates, instances, models, subcircuits, circuits.

Templates (Component, Model, and a Subcircuit once fixed) are immutable values
and can be shared freely. A Circuit is a single-writer container: it owns the
designator counters and the naming of chain-generated nets, both assigned when
elements are inserted.

Overloaded operators are available on templates and instances:

    inst = comp @ ["out", "in", "GND", "GND"]     rebind nets
    inst = comp % {"w": 0.27}                     override parameters
    circuit += inst                               insert (assigns designator)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import (
    ArityMismatchError,
    DuplicateModelError,
    DuplicatePinError,
    DuplicateSubcircuitError,
    EmptyNameError,
    EmptyPortsError,
    FrozenSubcircuitError,
    NetNameError,
)
from .params import Params

__all__ = [
    "Net",
    "UNCONNECTED",
    "GND",
    "VDD",
    "PendingNet",
    "as_net",
    "Component",
    "Instance",
    "Model",
    "Subcircuit",
    "Circuit",
    "UnresolvedTemplate",
    "rebind",
    "override_params",
    "fix",
]

_NET_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
_PREFIX_RE = re.compile(r"[A-Za-z_]+\Z")
_LINK_NET_RE = re.compile(r"net_(\d+)_(\d+)\Z")
_DESIGNATOR_RE = re.compile(r"([A-Za-z_]+)(\d+)\Z")

DEFAULT_GLOBALS = ("GND", "VDD", "0")


@dataclass(frozen=True)
class Net:
    """A named electrical node; `name` is None for the unconnected marker.

    Integer literals are accepted wherever nets are and normalize to their
    decimal text ("0" is ground by SPICE convention). Symbolic names are
    case-sensitive and match [A-Za-z_][A-Za-z0-9_.]*.
    """

    name: str | None

    @property
    def is_unconnected(self) -> bool:
        return self.name is None

    def __str__(self) -> str:
        return self.name if self.name is not None else ""

    def __repr__(self) -> str:
        return f"Net({self.name!r})" if self.name is not None else "UNCONNECTED"


UNCONNECTED = Net(None)
GND = Net("GND")
VDD = Net("VDD")


class _LinkGroup:
    """Identity token shared by the generated nets of one chain."""

    __slots__ = ()


@dataclass(frozen=True, eq=False)
class PendingNet:
    """A chain-generated net awaiting its final name.

    Chains create one PendingNet per link; a container replaces it with
    Net(f"net_{k}_{index}") at insertion, where k is the container's chain
    counter. Two pending nets compare equal when their link index matches,
    which is what construction-determinism checks need.
    """

    group: _LinkGroup
    index: int

    def __eq__(self, other):
        if not isinstance(other, PendingNet):
            return NotImplemented
        return self.index == other.index

    def __hash__(self):
        return hash(("pending-net", self.index))

    @property
    def is_unconnected(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"net_0_{self.index}"

    def __repr__(self) -> str:
        return f"PendingNet({self.index})"


NetLike = Union[Net, PendingNet, str, int, None]


def as_net(value: NetLike) -> Net | PendingNet:
    """Normalize a net-like value: Net/PendingNet pass through, "" and None
    mean unconnected, non-negative integers (and digit strings) become their
    decimal text, and anything else must be a valid symbolic name."""
    if isinstance(value, (Net, PendingNet)):
        return value
    if value is None:
        return UNCONNECTED
    if isinstance(value, bool):
        raise TypeError("bool is not a net")
    if isinstance(value, int):
        if value < 0:
            raise NetNameError(f"numeric nets must be >= 0, got {value}")
        return Net(str(value))
    if isinstance(value, str):
        if value == "":
            return UNCONNECTED
        if value.isdigit():
            return Net(str(int(value)))
        if _NET_NAME_RE.match(value):
            return Net(value)
        raise NetNameError(f"invalid net name {value!r}")
    raise TypeError(f"expected a net name, got {type(value).__name__}")


def _as_metadata(metadata) -> dict[str, str]:
    out: dict[str, str] = {}
    for key, value in dict(metadata or {}).items():
        if not isinstance(key, str) or not isinstance(value, str):
            raise TypeError("metadata keys and values must be strings")
        out[key] = value
    return out


def _derive_prefix(name: str) -> str:
    for ch in name:
        if ch.isalpha():
            return ch.upper()
    return "U"


class _TemplateOps:
    """Operator sugar shared by everything usable as an instantiation template."""

    def __matmul__(self, nets):
        return rebind(self, nets)

    def __mod__(self, overrides):
        return override_params(self, overrides)

    def __call__(self, nets=None, params=None) -> "Instance":
        inst = as_instance(self)
        if nets is not None:
            inst = rebind(inst, nets)
        if params is not None:
            inst = override_params(inst, params)
        return inst


@dataclass(frozen=True, init=False)
class Component(_TemplateOps):
    """Reusable device template.

    `ports` holds the default nets that new instances start from; its length
    fixes the arity of every instance. `prefix` seeds designators (R -> R1,
    R2, ...) and defaults to the first letter of the name, uppercased.
    """

    name: str
    ports: tuple
    params: Params
    prefix: str
    metadata: dict

    def __init__(self, name, ports, params=None, prefix=None, metadata=None):
        if not name or not isinstance(name, str):
            raise EmptyNameError("component name must be a non-empty string")
        ports = tuple(as_net(p) for p in (ports or ()))
        if not ports:
            raise EmptyPortsError(f"component {name!r} needs at least one port")
        if prefix is None:
            prefix = _derive_prefix(name)
        if not isinstance(prefix, str) or not _PREFIX_RE.match(prefix):
            raise ValueError(f"designator prefix must be alphabetic, got {prefix!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "ports", ports)
        object.__setattr__(self, "params", params if isinstance(params, Params) else Params(params))
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "metadata", _as_metadata(metadata))

    @property
    def arity(self) -> int:
        return len(self.ports)

    @property
    def last_port(self):
        return self.ports[-1]

    def __repr__(self):
        return f"Component({self.name!r}, ports={len(self.ports)}, prefix={self.prefix!r})"


@dataclass(frozen=True, init=False)
class UnresolvedTemplate:
    """Master known only by name, e.g. from an imported document whose
    definition is missing; lint reports it as UNDEFINED_MASTER."""

    name: str
    arity: int

    def __init__(self, name: str, arity: int):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arity", int(arity))

    @property
    def ports(self) -> tuple:
        return (UNCONNECTED,) * self.arity

    @property
    def params(self) -> Params:
        return Params()

    @property
    def prefix(self) -> str:
        return "U"


@dataclass(frozen=True, init=False)
class Model:
    """A device model card: name, base type (nmos, pmos, ...), parameters."""

    name: str
    base_type: str
    params: Params

    def __init__(self, name, base_type, params=None):
        if not name or not isinstance(name, str):
            raise EmptyNameError("model name must be a non-empty string")
        if not base_type or not isinstance(base_type, str):
            raise EmptyNameError("model base type must be a non-empty string")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "base_type", base_type)
        object.__setattr__(self, "params", params if isinstance(params, Params) else Params(params))

    def __repr__(self):
        return f"Model({self.name!r}, {self.base_type!r})"


@dataclass(eq=False)
class Instance(_TemplateOps):
    """A concrete placement of a template on specific nets.

    `overrides` shadow the template's parameters; `designator` stays None
    until the instance enters a circuit or subcircuit. `context` carries
    extra names (array coordinates) visible to formula evaluation.

    Equality ignores the designator, so rebinding an instance onto the same
    nets produces an equal instance.
    """

    template: object
    nets: tuple
    overrides: Params = field(default_factory=Params)
    designator: str | None = None
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nets = tuple(as_net(n) for n in self.nets)
        if not isinstance(self.overrides, Params):
            self.overrides = Params(self.overrides)

    @property
    def arity(self) -> int:
        return len(self.nets)

    @property
    def nodes(self) -> tuple:
        return self.nets

    @property
    def ports(self) -> tuple:
        # instances expose their bound nets under the template vocabulary,
        # so chain/inject code can treat templates and instances alike
        return self.nets

    @property
    def last_port(self):
        return self.nets[-1]

    def effective_params(self) -> Params:
        return self.template.params.merged(self.overrides)

    def copy(self) -> "Instance":
        return Instance(
            self.template,
            self.nets,
            self.overrides.copy(),
            designator=None,
            context=dict(self.context),
        )

    def __imatmul__(self, nets):
        self.nets = _rebound_nets(self, nets)
        return self

    def __imod__(self, overrides):
        self.overrides = self.overrides.merged(overrides)
        return self

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.template == other.template
            and self.nets == other.nets
            and self.overrides == other.overrides
            and self.context == other.context
        )

    def __repr__(self):
        nets = " ".join(str(n) or "''" for n in self.nets)
        return f"<{self.designator or '?'} {getattr(self.template, 'name', '?')} ({nets})>"


def as_instance(obj) -> Instance:
    """Instantiate a template with its default nets, or copy an instance."""
    if isinstance(obj, Instance):
        return obj.copy()
    if isinstance(obj, (Component, Subcircuit, UnresolvedTemplate)):
        return Instance(obj, obj.ports)
    raise TypeError(f"cannot instantiate {type(obj).__name__}")


def _rebound_nets(inst: Instance, nets) -> tuple:
    if isinstance(nets, (str, int, Net, PendingNet)) or nets is None:
        # single-net form: rebind the first unconnected port, else port 0
        target = 0
        for i, net in enumerate(inst.nets):
            if isinstance(net, Net) and net.is_unconnected:
                target = i
                break
        new = list(inst.nets)
        new[target] = as_net(nets)
        return tuple(new)
    nets = tuple(as_net(n) for n in nets)
    if len(nets) != len(inst.nets):
        raise ArityMismatchError(
            f"{getattr(inst.template, 'name', '?')} has {len(inst.nets)} ports, "
            f"got {len(nets)} nets"
        )
    return nets


def rebind(template_or_instance, nets) -> Instance:
    """Fresh instance with nets rebound (the template is never modified).

    Passing a single net rebinds the first unconnected port, or port 0 when
    every port is already connected.
    """
    inst = as_instance(template_or_instance)
    inst.nets = _rebound_nets(inst, nets)
    return inst


def override_params(template_or_instance, overrides) -> Instance:
    """Fresh instance whose parameters are shadowed by `overrides`.

    Unknown keys extend the parameter map; nothing is ever deleted.
    """
    inst = as_instance(template_or_instance)
    inst.overrides = inst.overrides.merged(overrides)
    return inst


class _InstanceScope:
    """Shared insertion machinery: designator counters and chain-net naming."""

    def _init_scope(self):
        self._counters: dict[str, int] = {}
        self._link_groups: dict[_LinkGroup, int] = {}
        self._next_link_group = 0

    def _finalize_nets(self, inst: Instance) -> None:
        if not any(isinstance(n, PendingNet) for n in inst.nets):
            return
        nets = []
        for net in inst.nets:
            if isinstance(net, PendingNet):
                k = self._link_groups.get(net.group)
                if k is None:
                    k = self._next_link_group
                    self._next_link_group += 1
                    self._link_groups[net.group] = k
                nets.append(Net(f"net_{k}_{net.index}"))
            else:
                nets.append(net)
        inst.nets = tuple(nets)

    def _assign_designator(self, inst: Instance) -> None:
        if inst.designator is not None:
            return
        template = inst.template
        prefix = "X" if isinstance(template, Subcircuit) else template.prefix
        count = self._counters.get(prefix, 0) + 1
        self._counters[prefix] = count
        inst.designator = f"{prefix}{count}"

    def _recover_counters(self, instances: Iterable[Instance]) -> None:
        """After an import, continue numbering past what is already used."""
        for inst in instances:
            if inst.designator:
                m = _DESIGNATOR_RE.match(inst.designator)
                if m:
                    prefix, num = m.group(1), int(m.group(2))
                    if num > self._counters.get(prefix, 0):
                        self._counters[prefix] = num
            for net in inst.nets:
                if isinstance(net, Net) and net.name:
                    m = _LINK_NET_RE.match(net.name)
                    if m and int(m.group(1)) >= self._next_link_group:
                        self._next_link_group = int(m.group(1)) + 1


class Subcircuit(_TemplateOps, _InstanceScope):
    """A reusable hierarchical block, instantiated like a component.

    Pins are symbolic names; when the subcircuit is used as a template its
    default nets are the pin names themselves. `fix()` freezes the body so
    no further elements can be added.
    """

    def __init__(self, name: str, pins, params=None):
        if not name or not isinstance(name, str):
            raise EmptyNameError("subcircuit name must be a non-empty string")
        pins = tuple(pins or ())
        for pin in pins:
            if not isinstance(pin, str) or not _NET_NAME_RE.match(pin):
                raise NetNameError(f"invalid pin name {pin!r}")
        if len(set(pins)) != len(pins):
            raise DuplicatePinError(f"duplicate pins in subcircuit {name!r}: {list(pins)}")
        self.name = name
        self.pins = pins
        self.params = params if isinstance(params, Params) else Params(params)
        self.body: list[Instance] = []
        self.nested: list[Subcircuit] = []
        self.fixed = False
        self._init_scope()

    @property
    def ports(self) -> tuple:
        return tuple(Net(pin) for pin in self.pins)

    @property
    def arity(self) -> int:
        return len(self.pins)

    @property
    def prefix(self) -> str:
        return "X"

    def fix(self) -> None:
        """Freeze the body; idempotent."""
        self.fixed = True

    def add(self, element) -> "Subcircuit":
        """Append instances (or register nested definitions) in order."""
        if self.fixed:
            raise FrozenSubcircuitError(f"subcircuit {self.name!r} is fixed")
        for inst in _iter_addable(element):
            if isinstance(inst, Instance):
                self._finalize_nets(inst)
                self._assign_designator(inst)
                self.body.append(inst)
            elif isinstance(inst, Subcircuit):
                self._register_nested(inst)
            else:
                raise TypeError(
                    f"cannot add {type(inst).__name__} to a subcircuit"
                )
        return self

    def _register_nested(self, sub: "Subcircuit") -> None:
        for existing in self.nested:
            if existing.name == sub.name:
                if existing is sub:
                    return
                raise DuplicateSubcircuitError(
                    f"nested subcircuit {sub.name!r} already defined in {self.name!r}"
                )
        self.nested.append(sub)

    def __iadd__(self, element):
        return self.add(element)

    def __eq__(self, other):
        if not isinstance(other, Subcircuit):
            return NotImplemented
        return (
            self.name == other.name
            and self.pins == other.pins
            and self.params == other.params
            and self.fixed == other.fixed
            and len(self.body) == len(other.body)
            and all(
                a == b and a.designator == b.designator
                for a, b in zip(self.body, other.body)
            )
            and self.nested == other.nested
        )

    def __hash__(self):
        return hash(("subcircuit", self.name, self.pins))

    def __repr__(self):
        return f"Subcircuit({self.name!r}, pins={list(self.pins)}, body={len(self.body)})"


class Circuit(_InstanceScope):
    """An exportable netlist: instances plus model and subcircuit definitions.

    Insertion order is preserved everywhere and determines export order.
    Designator counters belong to the circuit and are never reused. Adding an
    instance of a subcircuit registers that subcircuit's definition
    automatically. Single-writer: mutate from one thread only.
    """

    def __init__(self, rng_seed: int = 0, global_nets=DEFAULT_GLOBALS):
        self.instances: list[Instance] = []
        self.subcircuits: dict[str, Subcircuit] = {}
        self.models: dict[str, Model] = {}
        self.global_nets: list[str] = list(dict.fromkeys(global_nets))
        self.directives: list[str] = []
        self.rng_seed = int(rng_seed)
        self._init_scope()

    def add(self, element) -> "Circuit":
        """Insert instances, manipulations, models, subcircuit definitions,
        or (possibly nested) sequences of those, in order."""
        for item in _iter_addable(element):
            if isinstance(item, Instance):
                self._insert(item)
            elif isinstance(item, Model):
                self._register_model(item)
            elif isinstance(item, Subcircuit):
                self._register_subcircuit(item)
            else:
                raise TypeError(f"cannot add {type(item).__name__} to a circuit")
        return self

    def __iadd__(self, element):
        return self.add(element)

    def _insert(self, inst: Instance) -> None:
        self._finalize_nets(inst)
        if isinstance(inst.template, Subcircuit):
            self._register_subcircuit(inst.template)
        self._assign_designator(inst)
        self.instances.append(inst)

    def _register_model(self, model: Model) -> None:
        if model.name in self.models:
            raise DuplicateModelError(f"model {model.name!r} already defined")
        self.models[model.name] = model

    def _register_subcircuit(self, sub: Subcircuit) -> None:
        existing = self.subcircuits.get(sub.name)
        if existing is None:
            self.subcircuits[sub.name] = sub
        elif existing is not sub:
            raise DuplicateSubcircuitError(f"subcircuit {sub.name!r} already defined")

    def into_subckt(self, name: str, pins, params=None) -> Subcircuit:
        """Package this circuit's instances as a subcircuit definition.

        The new subcircuit shares the instance objects; the circuit itself
        stays usable. Definitions referenced by the body travel along as
        nested definitions. A pin that never appears as a net in the body is
        reported later by lint (UNUSED_PIN), not rejected here.
        """
        sub = Subcircuit(name, pins, params)
        sub.body = list(self.instances)
        used = {
            inst.template.name
            for inst in sub.body
            if isinstance(inst.template, Subcircuit)
        }
        sub.nested = [d for d in self.subcircuits.values() if d.name in used]
        sub._counters = dict(self._counters)
        sub._link_groups = dict(self._link_groups)
        sub._next_link_group = self._next_link_group
        return sub

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            len(self.instances) == len(other.instances)
            and all(
                a == b and a.designator == b.designator
                for a, b in zip(self.instances, other.instances)
            )
            and list(self.subcircuits.items()) == list(other.subcircuits.items())
            and list(self.models.items()) == list(other.models.items())
            and self.global_nets == other.global_nets
            and self.directives == other.directives
            and self.rng_seed == other.rng_seed
        )

    def __repr__(self):
        return (
            f"Circuit(instances={len(self.instances)}, models={len(self.models)}, "
            f"subcircuits={len(self.subcircuits)}, seed={self.rng_seed})"
        )


def _iter_addable(element):
    """Flatten whatever `add` accepts into a stream of addable items.

    Manipulations and nested sequences flatten depth-first in child order.
    """
    from .manip import Manipulation  # local import avoids a cycle

    if isinstance(element, (Instance, Model, Subcircuit)):
        yield element
    elif isinstance(element, Manipulation):
        yield from element.children
    elif isinstance(element, (str, bytes, dict)):
        raise TypeError(f"cannot add {type(element).__name__} to a container")
    elif isinstance(element, Iterable):
        for item in element:
            yield from _iter_addable(item)
    else:
        yield element  # let the caller produce its TypeError


def fix(subcircuit: Subcircuit) -> None:
    """Freeze a subcircuit so later additions raise FrozenSubcircuitError."""
    subcircuit.fix()
