"""Name resolution and evaluation of parsed .catq programs.

Declarations are validated in order; instance declarations are
saturated into term models immediately, and derived declarations
(sigma/delta/pi/coproduct/compose/identity) are evaluated with the
migration engine.  Directives are resolved but not executed here;
the CLI runs them against the returned environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import CatqError, ResourceLimit
from .mappings import Mapping, compose_mappings, identity_mapping, validate_mapping
from .migrate import delta, pi, sigma, coproduct
from .model import DEFAULT_LIMITS, SaturationLimits, TermModel, build_term_model
from .parser import (
    Diagnostic,
    Directive,
    DerivedDecl,
    InstanceDecl,
    MappingDecl,
    Program,
    RawEquation,
    RawImage,
    RawTerm,
    SchemaDecl,
    SourceSpan,
    TypesideDecl,
)
from .schema import (
    InstancePresentation,
    Schema,
    Typeside,
    builtin_typeside,
    generator,
    validate_instance,
    validate_schema,
    validate_typeside,
)
from .terms import (
    ATTRIBUTE,
    ENTITY,
    FOREIGN_KEY,
    INT,
    STRING,
    TYPE,
    TYPESIDE,
    App,
    Equation,
    FunctionSymbol,
    Sort,
    Term,
    Var,
    literal,
    parse_int_literal,
)


@dataclass
class Environment:
    typesides: dict[str, Typeside] = field(default_factory=dict)
    schemas: dict[str, Schema] = field(default_factory=dict)
    instances: dict[str, InstancePresentation] = field(default_factory=dict)
    models: dict[str, TermModel] = field(default_factory=dict)
    mappings: dict[str, Mapping] = field(default_factory=dict)
    order: list[tuple[str, str]] = field(default_factory=list)  # (kind, name)
    directives: list[Directive] = field(default_factory=list)

    def defined(self, name: str) -> bool:
        return any(name in d for d in (self.typesides, self.schemas,
                                       self.instances, self.mappings))


class _Elaborator:
    def __init__(self, limits: SaturationLimits):
        self.env = Environment()
        self.diags: list[Diagnostic] = []
        self.limits = limits

    def error(self, code: str, message: str, span: Optional[SourceSpan] = None):
        self.diags.append(Diagnostic("error", code, message, span))

    def issues_to_diags(self, issues, span: Optional[SourceSpan]):
        for issue in issues:
            self.error(issue.code, issue.message, span)
        return bool(issues)

    # -- term resolution -------------------------------------------------

    def resolve_term(self, raw: RawTerm, schema: Schema,
                     inst: Optional[InstancePresentation],
                     bound: dict[str, Sort],
                     expected: Optional[Sort]) -> Optional[Term]:
        """Resolve a raw application tree against a schema context.

        A leaf resolves, in order, to a bound variable, a declared
        generator, a typeside constant, and finally a literal of the
        expected built-in type.
        """
        name = raw.name
        if raw.args:
            sym = schema.symbol_named(name)
            if sym is None:
                self.error("UnknownSymbol", f"unknown symbol {name}", raw.span)
                return None
            if len(raw.args) != 1:
                self.error("SortMismatch", f"{name} takes one argument", raw.span)
                return None
            arg = self.resolve_term(raw.args[0], schema, inst, bound, sym.arg_sorts[0])
            if arg is None:
                return None
            if arg.sort != sym.arg_sorts[0]:
                self.error("SortMismatch",
                           f"argument of {name} has sort {arg.sort.name}, "
                           f"expected {sym.arg_sorts[0].name}", raw.span)
                return None
            return App(sym, (arg,))
        if not raw.quoted:
            if name in bound:
                return Var(name, bound[name])
            if inst is not None:
                g = inst.generator_named(name)
                if g is not None:
                    return App(g)
            const = schema.typeside.constant_named(name)
            if const is not None:
                return App(const)
        if expected is not None and not expected.is_entity and schema.typeside.has_type(expected):
            if expected == INT:
                if parse_int_literal(name) is None:
                    self.error("SortMismatch", f"{name!r} is not an Int literal", raw.span)
                    return None
                return literal(name, INT)
            if expected == STRING:
                return literal(name, STRING)
        if not raw.quoted and parse_int_literal(name) is not None and schema.typeside.has_type(INT):
            return literal(name, INT)
        if raw.quoted and schema.typeside.has_type(STRING):
            return literal(name, STRING)
        self.error("NameResolution", f"cannot resolve {name!r}"
                   + (f" at sort {expected.name}" if expected else ""), raw.span)
        return None

    def resolve_equation(self, raw: RawEquation, schema: Schema,
                         inst: Optional[InstancePresentation],
                         bound: dict[str, Sort]) -> Optional[Equation]:
        lhs = self.resolve_term(raw.lhs, schema, inst, bound, None)
        if lhs is None:
            return None
        rhs = self.resolve_term(raw.rhs, schema, inst, bound, lhs.sort)
        if rhs is None:
            return None
        if lhs.sort != rhs.sort:
            self.error("SortMismatch",
                       f"equation sides have sorts {lhs.sort.name} and {rhs.sort.name}", raw.span)
            return None
        free = tuple(Var(n, s) for n, s in bound.items())
        return Equation(free, lhs, rhs)

    # -- declarations ------------------------------------------------------

    def check_fresh(self, name: str, span: SourceSpan) -> bool:
        if self.env.defined(name):
            self.error("NameResolution", f"duplicate declaration of {name}", span)
            return False
        return True

    def do_typeside(self, d: TypesideDecl):
        ts = builtin_typeside(d.name)
        for t in d.types:
            if t not in ("String", "Int"):
                ts.types.append(Sort(t, TYPE))
        for names, sort_name in d.constants:
            sort = ts.type_named(sort_name)
            if sort is None:
                self.error("UnknownSort", f"unknown type {sort_name}", d.span)
                continue
            for n in names:
                ts.constants.append(FunctionSymbol(n, (), sort, TYPESIDE))
        # typeside equations are resolved against a symbol-free schema shell
        shell = Schema(f"_{d.name}", ts)
        for raw in d.equations:
            eq = self.resolve_equation(raw, shell, None, {})
            if eq is not None:
                ts.equations.append(eq)
        if not self.issues_to_diags(validate_typeside(ts), d.span):
            self.env.typesides[d.name] = ts
            self.env.order.append(("typeside", d.name))

    def do_schema(self, d: SchemaDecl):
        ts = self.env.typesides.get(d.typeside_ref)
        if ts is None:
            self.error("NameResolution", f"unknown typeside {d.typeside_ref}", d.span)
            return
        sch = Schema(d.name, ts, [Sort(e, ENTITY) for e in d.entities])
        for names, frm, to in d.foreign_keys:
            a, b = sch.entity_named(frm), sch.entity_named(to)
            if a is None or b is None:
                self.error("UnknownSort", f"foreign key endpoints {frm} -> {to} must be entities", d.span)
                continue
            sch.foreign_keys.extend(FunctionSymbol(n, (a,), b, FOREIGN_KEY) for n in names)
        for names, frm, to in d.attributes:
            a, b = sch.entity_named(frm), ts.type_named(to)
            if a is None or b is None:
                self.error("UnknownSort", f"attribute must map an entity to a type: {frm} -> {to}", d.span)
                continue
            sch.attributes.extend(FunctionSymbol(n, (a,), b, ATTRIBUTE) for n in names)
        for raw in d.equations:
            if raw.var is None:
                self.error("BadConstraintShape",
                           "schema equations must be quantified: forall x:E. ...", raw.span)
                continue
            if raw.var_sort is None:
                self.error("BadConstraintShape",
                           f"quantified variable {raw.var} needs a sort annotation", raw.span)
                continue
            vs = sch.entity_named(raw.var_sort)
            if vs is None:
                self.error("UnknownSort", f"unknown entity {raw.var_sort}", raw.span)
                continue
            eq = self.resolve_equation(raw, sch, None, {raw.var: vs})
            if eq is not None:
                sch.constraints.append(eq)
        if not self.issues_to_diags(validate_schema(sch), d.span):
            self.env.schemas[d.name] = sch
            self.env.order.append(("schema", d.name))

    def register_instance(self, name: str, pres: InstancePresentation,
                          span: Optional[SourceSpan], model: Optional[TermModel] = None) -> bool:
        try:
            m = model if model is not None else build_term_model(pres, limits=self.limits)
        except ResourceLimit as e:
            self.error("ResourceLimit", str(e), span)
            return False
        self.env.instances[name] = pres
        self.env.models[name] = m
        self.env.order.append(("instance", name))
        return True

    def do_instance(self, d: InstanceDecl):
        sch = self.env.schemas.get(d.schema_ref)
        if sch is None:
            self.error("NameResolution", f"unknown schema {d.schema_ref}", d.span)
            return
        pres = InstancePresentation(d.name, sch)
        for names, sort_name in d.generators:
            sort = sch.sort_named(sort_name)
            if sort is None:
                self.error("UnknownSort", f"unknown sort {sort_name}", d.span)
                continue
            pres.generators.extend(generator(n, sort) for n in names)
        for raw in d.equations:
            eq = self.resolve_equation(raw, sch, pres, {})
            if eq is not None:
                pres.equations.append(eq)
        if self.issues_to_diags(validate_instance(pres), d.span):
            return
        self.register_instance(d.name, pres, d.span)

    def resolve_image(self, img: RawImage, sym: FunctionSymbol,
                      f_map: Mapping) -> Optional[Term]:
        """Resolve a mapping image, in lambda or shorthand form.

        In shorthand form the whole body is a term whose single
        unresolved leaf is taken to be the bound variable.
        """
        tgt = f_map.target
        arg_sort = f_map.sort_image(sym.arg_sorts[0])
        if img.var is not None:
            if img.var_sort is not None and img.var_sort != arg_sort.name:
                self.error("SortMismatch",
                           f"lambda variable must have sort {arg_sort.name}", img.span)
                return None
            return self.resolve_term(img.body, tgt, None, {img.var: arg_sort}, None)

        # shorthand: find the variable leaf (the one unknown identifier)
        leaves: set[str] = set()

        def scan(r: RawTerm):
            if r.args:
                for a in r.args:
                    scan(a)
            elif not r.quoted and tgt.typeside.constant_named(r.name) is None \
                    and parse_int_literal(r.name) is None:
                leaves.add(r.name)

        scan(img.body)
        if len(leaves) > 1:
            self.error("NameResolution",
                       f"mapping image has several candidate variables: {sorted(leaves)}", img.span)
            return None
        bound = {name: arg_sort for name in leaves}
        if not img.body.args and not leaves:
            # a bare known name: a target symbol applied to the variable
            g = tgt.symbol_named(img.body.name)
            if g is not None:
                return App(g, (Var("x", arg_sort),))
        if not img.body.args and img.body.name in bound:
            return Var(img.body.name, arg_sort)
        if img.body.args:
            head = tgt.symbol_named(img.body.name)
            if head is not None:
                return self.resolve_term(img.body, tgt, None, bound, None)
        return self.resolve_term(img.body, tgt, None, bound, None)

    def do_mapping(self, d: MappingDecl):
        src = self.env.schemas.get(d.source_ref)
        tgt = self.env.schemas.get(d.target_ref)
        if src is None or tgt is None:
            self.error("NameResolution",
                       f"unknown schema in mapping header: {d.source_ref} -> {d.target_ref}", d.span)
            return
        f_map = Mapping(d.name, src, tgt)
        for a, b in d.entities:
            ea, eb = src.entity_named(a), tgt.entity_named(b)
            if ea is None or eb is None:
                self.error("UnknownSort", f"unknown entity in {a} -> {b}", d.span)
                continue
            f_map.entity_map[ea] = eb
        for fname, img in d.foreign_keys + d.attributes:
            sym = src.symbol_named(fname)
            if sym is None:
                self.error("UnknownSymbol", f"unknown source symbol {fname}", img.span)
                continue
            if sym.arg_sorts[0] not in f_map.entity_map:
                self.error("NameResolution",
                           f"entity {sym.arg_sorts[0].name} has no image yet (declare it first)",
                           img.span)
                continue
            t = self.resolve_image(img, sym, f_map)
            if t is not None:
                f_map.symbol_map[sym] = t
        try:
            issues = validate_mapping(f_map, self.limits)
        except ResourceLimit as e:
            self.error("ResourceLimit", str(e), d.span)
            return
        if self.issues_to_diags(issues, d.span):
            return
        self.env.mappings[d.name] = f_map
        self.env.order.append(("mapping", d.name))

    def do_derived(self, d: DerivedDecl):
        try:
            if d.op in ("sigma", "delta", "pi"):
                f_map = self.env.mappings.get(d.args[0])
                inst_name = d.args[1]
                if f_map is None:
                    self.error("NameResolution", f"unknown mapping {d.args[0]}", d.span)
                    return
                if inst_name not in self.env.instances:
                    self.error("NameResolution", f"unknown instance {inst_name}", d.span)
                    return
                if d.op == "sigma":
                    res = sigma(f_map, self.env.instances[inst_name], self.limits)
                elif d.op == "delta":
                    res = delta(f_map, self.env.models[inst_name], self.limits)
                else:
                    res = pi(f_map, self.env.models[inst_name], self.limits)
                pres = res.presentation
                pres.name = d.name
                self.register_instance(d.name, pres, d.span, res.model)
            elif d.op == "coproduct":
                parts = []
                for a in d.args:
                    if a not in self.env.instances:
                        self.error("NameResolution", f"unknown instance {a}", d.span)
                        return
                    parts.append(self.env.instances[a])
                pres = coproduct(parts[0], parts[1], name=d.name)
                self.register_instance(d.name, pres, d.span)
            elif d.op == "compose":
                # `compose F G` is the pipeline: first F, then G
                maps = [self.env.mappings.get(a) for a in d.args]
                if any(m is None for m in maps):
                    self.error("NameResolution", f"unknown mapping among {d.args}", d.span)
                    return
                h = compose_mappings(maps[0], maps[1], self.limits)
                h.name = d.name
                self.env.mappings[d.name] = h
                self.env.order.append(("mapping", d.name))
            elif d.op == "identity":
                sch = self.env.schemas.get(d.args[0])
                if sch is None:
                    self.error("NameResolution", f"unknown schema {d.args[0]}", d.span)
                    return
                h = identity_mapping(sch, name=d.name)
                self.env.mappings[d.name] = h
                self.env.order.append(("mapping", d.name))
        except ResourceLimit as e:
            self.error("ResourceLimit", str(e), d.span)
        except CatqError as e:
            self.error(type(e).__name__, str(e), d.span)

    def do_directive(self, d: Directive):
        if d.op == "check":
            if d.args[0] not in self.env.instances:
                self.error("NameResolution", f"unknown instance {d.args[0]}", d.span)
                return
        elif d.op == "invert":
            if d.args[0] not in self.env.mappings:
                self.error("NameResolution", f"unknown mapping {d.args[0]}", d.span)
                return
        elif d.op == "match":
            for a in d.args:
                if a not in self.env.schemas:
                    self.error("NameResolution", f"unknown schema {a}", d.span)
                    return
        self.env.directives.append(d)

    def run(self, prog: Program) -> Environment:
        for d in prog.decls:
            if isinstance(d, TypesideDecl):
                if self.check_fresh(d.name, d.span):
                    self.do_typeside(d)
            elif isinstance(d, SchemaDecl):
                if self.check_fresh(d.name, d.span):
                    self.do_schema(d)
            elif isinstance(d, InstanceDecl):
                if self.check_fresh(d.name, d.span):
                    self.do_instance(d)
            elif isinstance(d, MappingDecl):
                if self.check_fresh(d.name, d.span):
                    self.do_mapping(d)
            elif isinstance(d, DerivedDecl):
                if self.check_fresh(d.name, d.span):
                    self.do_derived(d)
            elif isinstance(d, Directive):
                self.do_directive(d)
        return self.env


def elaborate(prog: Program,
              limits: SaturationLimits = DEFAULT_LIMITS) -> tuple[Environment, list[Diagnostic]]:
    """Resolve, validate and evaluate a parsed program in order."""
    elab = _Elaborator(limits)
    env = elab.run(prog)
    return env, elab.diags
