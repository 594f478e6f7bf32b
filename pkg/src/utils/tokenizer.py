"""
Tokenização por espaços em branco
"""
from typing import List, Sequence


def tokenize(text: str) -> List[str]:
    """Divide o texto em tokens por qualquer espaço Unicode, preservando a ordem"""
    return text.split()


def detokenize(tokens: Sequence[str]) -> str:
    """Junta os tokens com um espaço simples"""
    return " ".join(tokens)
