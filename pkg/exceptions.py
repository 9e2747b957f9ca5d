from typing import Any, Dict, Optional


class MgkError(Exception):
    """Erreur de base de la boîte à outils."""


class BackendMismatchError(MgkError, TypeError):
    """Arithmétique entre éléments de backends ou de domaines différents."""


class PreconditionError(MgkError, ValueError):
    """Précondition d'une opération non respectée, avec un témoin éventuel."""

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = witness or {}


class ResourceCapExceeded(MgkError):
    """Plafond de ressources atteint (boule, clôture, BSGS)."""

    def __init__(self, message: str, cap: int, reached: int = 0):
        super().__init__(message)
        self.cap = cap
        self.reached = reached


class ConfigError(MgkError):
    """Configuration JSON invalide ou champ inconnu."""


class StageFailure(MgkError):
    """Échec d'une étape du pipeline."""

    def __init__(self, stage: int, reason: str):
        super().__init__(f"étape {stage} : {reason}")
        self.stage = stage
        self.reason = reason
