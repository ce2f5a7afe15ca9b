"""Name normalization for object/attribute annotations and class labels.

Raw annotation names ("a baseball bat", "The Dogs!") are reduced to
canonical keys: casefolded, punctuation stripped, stopwords removed per
word kind, and each surviving token singularized with ordered suffix
rules backed by a shipped irregular-plural table.  Verb forms are never
lemmatized ("building" stays "building"); class-name verbs are handled
by an optional alias table instead.
"""

import functools
from dataclasses import dataclass
from importlib import resources

NOUN = "noun"
ATTRIBUTE = "attribute"


def parse_wordlist(lines):
    """One entry per line, '#' starts a comment, blanks ignored."""
    words = set()
    for raw in lines:
        entry = raw.split("#", 1)[0].strip()
        if entry:
            words.add(entry.casefold())
    return words


def parse_pairs(lines):
    """Two whitespace-separated fields per line ('#' comments allowed)."""
    pairs = {}
    for raw in lines:
        entry = raw.split("#", 1)[0].strip()
        if not entry:
            continue
        fields = entry.split()
        if len(fields) != 2:
            raise ValueError(f"expected two fields, got: {entry!r}")
        pairs[fields[0].casefold()] = fields[1].casefold()
    return pairs


def load_wordlist(path):
    with open(path, encoding="utf-8") as fh:
        return parse_wordlist(fh)


def load_pairs(path):
    with open(path, encoding="utf-8") as fh:
        return parse_pairs(fh)


def _data_lines(name):
    return resources.files("conceptbank.data").joinpath(name).read_text(
        encoding="utf-8").splitlines()


@functools.lru_cache(maxsize=1)
def irregular_plurals():
    return parse_pairs(_data_lines("irregular_plurals.txt"))


@dataclass(frozen=True)
class StopwordPolicy:
    """Stopword sets per word kind.

    The noun list also holds color/quality adjectives (a color word in an
    object name is not a noun); the attribute list must not, since words
    like "white" are proper attributes.
    """

    noun_stopwords: frozenset
    attribute_stopwords: frozenset

    @classmethod
    def default(cls):
        return cls(
            noun_stopwords=frozenset(
                parse_wordlist(_data_lines("noun_stopwords.txt"))),
            attribute_stopwords=frozenset(
                parse_wordlist(_data_lines("attribute_stopwords.txt"))),
        )

    def stopwords_for(self, kind):
        if kind == NOUN:
            return self.noun_stopwords
        if kind == ATTRIBUTE:
            return self.attribute_stopwords
        raise ValueError(f"unknown word kind: {kind!r}")


def singularize(word, irregulars=None):
    """Rule-based plural reduction of a single lowercase token.

    Ordered rules: irregulars table, "-ies" -> "-y", "-xes"/"-sses"/
    "-ches"/"-shes" -> strip "es", trailing "-s" stripped (never "-ss").
    Common "-ses" plurals (buses, lenses, ...) live in the irregulars
    table because a generic "-ses" rule would not be idempotent.
    """
    table = irregular_plurals() if irregulars is None else irregulars
    if word in table:
        return table[word]
    if word.endswith("ies") and len(word) >= 4:
        return word[:-3] + "y"
    for suffix in ("xes", "sses", "ches", "shes"):
        if word.endswith(suffix) and len(word) > len(suffix):
            return word[:-2]
    if word.endswith("s") and not word.endswith("ss") and len(word) >= 2:
        return word[:-1]
    return word


def _clean_tokens(text):
    """Casefold and split, mapping every non-alphanumeric char to space.

    Characters still uppercase after casefolding (math-style letter
    symbols with no case mapping) are treated as punctuation.
    """
    folded = text.casefold()
    cleaned = "".join(
        ch if ch.isalnum() and not ch.isupper() else " " for ch in folded)
    return cleaned.split()


def normalize_name(phrase, policy, kind):
    """Reduce a raw annotation phrase to its canonical concept key.

    Returns the empty string when every token is dropped.  Stopwords are
    matched against both the raw and the singularized token so the result
    is a fixed point of this function.
    """
    stop = policy.stopwords_for(kind)
    kept = []
    for token in _clean_tokens(phrase):
        if token in stop:
            continue
        singular = singularize(token)
        if singular in stop:
            continue
        kept.append(singular)
    return " ".join(kept)


def tokenize_class_name(name, policy, aliases=None):
    """Split a target-class label ("riding_a_horse") into lookup words.

    Lowercases, strips punctuation/underscores, drops noun stopwords and
    applies the optional alias table (e.g. riding -> ride).  No
    singularization: class words feed embedding lookup as-is.
    """
    aliases = aliases or {}
    words = []
    for token in _clean_tokens(name):
        if token in policy.noun_stopwords:
            continue
        words.append(aliases.get(token, token))
    return words
