"""A total lexer for Java and C that keeps byte spans for every token."""

import re
from dataclasses import dataclass

from ..errors import UnlexableInput
from .names import check_language, keywords, literal_words

KEYWORD = "keyword"
IDENTIFIER = "identifier"
LITERAL = "literal"
OPERATOR = "operator"
PUNCTUATION = "punctuation"
COMMENT = "comment"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int

    @property
    def span(self):
        return (self.start, self.end)


_OPERATORS = sorted(
    """>>>= <<= >>= >>> -> :: ++ -- && || == != <= >= += -= *= /= %= &= |= ^= << >>
    + - * / % = < > ! ~ & | ^ ? :""".split(),
    key=len,
    reverse=True,
)

_PUNCT = ["...", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "#"]

_NUMBER = (
    rb"0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?[0-9]+)?[lLuUfFdD]*"
    rb"|0[bB][01_]+[lLuU]*"
    rb"|(?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9][0-9_]*)(?:[eE][+-]?[0-9]+)?[fFdDlLuU]*"
)

_MASTER = re.compile(
    rb"(?P<ws>(?:[ \t\r\n\f\v]|\\\r?\n)+)"
    rb"|(?P<comment>//[^\n]*|/\*.*?\*/)"
    rb"|(?P<badcomment>/\*)"
    rb'|(?P<textblock>"""(?:\\.|(?!""").)*?""")'
    rb'|(?P<string>(?:u8|[LuU])?"(?:\\.|[^"\\\n])*")'
    rb"|(?P<char>(?:[LuU])?'(?:\\.|[^'\\\n])+')"
    rb"|(?P<number>" + _NUMBER + rb")"
    rb"|(?P<word>[A-Za-z_$][A-Za-z0-9_$]*)"
    rb"|(?P<op>" + b"|".join(re.escape(o.encode()) for o in _OPERATORS) + rb")"
    rb"|(?P<punct>" + b"|".join(re.escape(p.encode()) for p in _PUNCT) + rb")",
    re.DOTALL,
)


def tokenize(source, language):
    """Lex ``source`` into tokens. Whitespace lives in the gaps between spans."""
    lang = check_language(language)
    kw = keywords(lang)
    lits = literal_words(lang)
    data = source.encode("utf-8")
    tokens = []
    pos = 0
    n = len(data)
    while pos < n:
        m = _MASTER.match(data, pos)
        if m is None or m.lastgroup == "badcomment":
            raise UnlexableInput(pos)
        group = m.lastgroup
        end = m.end()
        if group != "ws":
            text = data[pos:end].decode("utf-8")
            if group == "comment":
                kind = COMMENT
            elif group in ("string", "char", "number", "textblock"):
                kind = LITERAL
            elif group == "word":
                if text in lits:
                    kind = LITERAL
                elif text in kw:
                    kind = KEYWORD
                else:
                    kind = IDENTIFIER
            elif group == "op":
                kind = OPERATOR
            else:
                kind = PUNCTUATION
            tokens.append(Token(kind, text, pos, end))
        pos = end
    return tokens


def render(source, tokens, replacements):
    """Rebuild ``source`` with token texts swapped per ``replacements`` (index -> text)."""
    data = source.encode("utf-8")
    out = []
    last = 0
    for idx in sorted(replacements):
        tok = tokens[idx]
        out.append(data[last:tok.start])
        out.append(replacements[idx].encode("utf-8"))
        last = tok.end
    out.append(data[last:])
    return b"".join(out).decode("utf-8")
