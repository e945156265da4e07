"""Parsing into CodeSnippet: tree-sitter CST plus a name-level identifier table."""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import tree_sitter_c
import tree_sitter_java
from tree_sitter import Language, Parser

from ..errors import CodeSyntaxError
from .lexer import IDENTIFIER, tokenize
from .names import check_language

VARIABLE = "variable"
PARAMETER = "parameter"
FUNCTION = "function"
TYPE = "type"

_GRAMMARS = {"java": tree_sitter_java.language, "c": tree_sitter_c.language}

# leaf node types that carry an identifier's text
_NAME_NODES = frozenset(
    {"identifier", "type_identifier", "field_identifier", "statement_identifier"}
)


@lru_cache(maxsize=None)
def _language(lang):
    return Language(_GRAMMARS[lang]())


def _parser(lang):
    # Parser objects are cheap; a fresh one per call keeps parse() reentrant.
    return Parser(_language(lang))


@dataclass(frozen=True)
class IdentifierEntry:
    name: str
    kind: str
    occurrences: tuple
    binding: int


@dataclass(frozen=True)
class IdentifierTable:
    entries: tuple = ()

    @cached_property
    def _by_name(self):
        return {e.name: e for e in self.entries}

    def __contains__(self, name):
        return name in self._by_name

    def __getitem__(self, name):
        return self._by_name[name]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def get(self, name, default=None):
        return self._by_name.get(name, default)

    def names(self):
        return [e.name for e in self.entries]


@dataclass(frozen=True)
class CodeSnippet:
    language: str
    source: str
    tokens: tuple
    tree: object = field(repr=False, compare=False)
    identifiers: IdentifierTable = field(repr=False, compare=False)

    @cached_property
    def identifier_names(self):
        """Texts of every identifier token, renameable or not."""
        return frozenset(t.text for t in self.tokens if t.kind == IDENTIFIER)

    @cached_property
    def shape(self):
        """Pre-order node-type sequence of the tree; ignores leaf texts."""
        out = []
        stack = [self.tree.root_node]
        while stack:
            node = stack.pop()
            out.append((node.type, node.child_count))
            stack.extend(reversed(node.children))
        return tuple(out)

    def __len__(self):
        return len(self.tokens)


def _first_error(node):
    stack = [node]
    while stack:
        n = stack.pop()
        if n.is_error or n.is_missing:
            return n
        if n.has_error:
            stack.extend(reversed(n.children))
    return node


def _walk(root):
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def _innermost_declarator(node):
    """Follow ``declarator`` fields down to the declared identifier (C)."""
    through_function = False
    while node is not None and node.type not in ("identifier", "field_identifier", "type_identifier"):
        if node.type == "function_declarator":
            through_function = True
        nxt = node.child_by_field_name("declarator")
        if nxt is None:
            # parenthesized_declarator has no field name
            named = [c for c in node.named_children]
            nxt = named[0] if named else None
        node = nxt
    return node, through_function


def _java_declarations(root):
    for node in _walk(root):
        t = node.type
        if t == "method_declaration":
            yield node.child_by_field_name("name"), FUNCTION
        elif t in ("class_declaration", "interface_declaration", "enum_declaration", "record_declaration"):
            yield node.child_by_field_name("name"), TYPE
        elif t in ("formal_parameter", "catch_formal_parameter"):
            yield node.child_by_field_name("name"), PARAMETER
        elif t == "spread_parameter":
            for c in node.named_children:
                if c.type == "variable_declarator":
                    yield c.child_by_field_name("name"), PARAMETER
        elif t == "variable_declarator":
            if node.parent is not None and node.parent.type == "spread_parameter":
                continue
            yield node.child_by_field_name("name"), VARIABLE
        elif t in ("enhanced_for_statement", "resource"):
            yield node.child_by_field_name("name"), VARIABLE
        elif t == "lambda_expression":
            params = node.child_by_field_name("parameters")
            if params is not None and params.type == "identifier":
                yield params, PARAMETER
            elif params is not None and params.type == "inferred_parameters":
                for c in params.named_children:
                    if c.type == "identifier":
                        yield c, PARAMETER


def _c_declarations(root):
    for node in _walk(root):
        t = node.type
        if t == "function_definition":
            ident, _ = _innermost_declarator(node.child_by_field_name("declarator"))
            yield ident, FUNCTION
        elif t == "parameter_declaration":
            decl = node.child_by_field_name("declarator")
            if decl is not None:
                ident, _ = _innermost_declarator(decl)
                yield ident, PARAMETER
        elif t == "declaration":
            for decl in node.children_by_field_name("declarator"):
                if decl.type == "init_declarator":
                    decl = decl.child_by_field_name("declarator")
                ident, is_fn = _innermost_declarator(decl)
                yield ident, FUNCTION if is_fn else VARIABLE


def _qualified(node, lang):
    """True for name positions reached through a receiver or qualifier."""
    if lang == "c":
        return node.type == "field_identifier"
    parent = node.parent
    if parent is None:
        return False
    pt = parent.type
    if pt == "field_access":
        return parent.child_by_field_name("field") == node
    if pt == "method_invocation":
        return parent.child_by_field_name("object") is not None and parent.child_by_field_name("name") == node
    if pt in ("method_reference", "scoped_identifier", "scoped_type_identifier", "element_value_pair"):
        return True
    if pt in ("marker_annotation", "annotation"):
        return True
    return False


def build_identifier_table(lang, tokens, tree):
    """Group renameable identifier occurrences by name.

    A name is renameable when it is declared inside the snippet and every
    token carrying it sits at a plain (unqualified) name position of the tree.
    """
    root = tree.root_node
    decls = _java_declarations(root) if lang == "java" else _c_declarations(root)
    declared = {}
    for ident, kind in decls:
        if ident is None or ident.type != "identifier":
            continue
        name = ident.text.decode("utf-8")
        declared.setdefault(name, (ident.start_byte, kind))

    name_nodes = {}
    for node in _walk(root):
        if node.type in _NAME_NODES and node.child_count == 0:
            name_nodes[node.start_byte] = node

    excluded = set()
    occurrences = {}
    for i, tok in enumerate(tokens):
        if tok.kind != IDENTIFIER or tok.text not in declared:
            continue
        node = name_nodes.get(tok.start)
        if node is None or node.end_byte != tok.end or _qualified(node, lang):
            excluded.add(tok.text)
        occurrences.setdefault(tok.text, []).append(i)

    entries = []
    for name, occ in sorted(occurrences.items(), key=lambda kv: kv[1][0]):
        if name in excluded:
            continue
        entries.append(IdentifierEntry(name, declared[name][1], tuple(occ), len(entries)))
    return IdentifierTable(tuple(entries))


def parse(source, language):
    """Parse ``source``; raises CodeSyntaxError on any error node."""
    lang = check_language(language)
    tokens = tuple(tokenize(source, lang))
    tree = _parser(lang).parse(source.encode("utf-8"))
    if tree.root_node.has_error:
        bad = _first_error(tree.root_node)
        row, col = bad.start_point
        raise CodeSyntaxError(bad.start_byte, row + 1, col + 1)
    table = build_identifier_table(lang, tokens, tree)
    return CodeSnippet(lang, source, tokens, tree, table)
