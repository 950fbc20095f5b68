"""Catalog of the regular families of symmetric critical points.

A family is named by its type (``I``: leading diagonal entry tends to -1,
``II``: tends to +1), the isotropy parameter ``p`` and the neuron surplus
``m = k - d``.  Only the combinations below are cataloged; anything else is
rejected with :class:`UnknownFamilyError`.
"""

from dataclasses import dataclass

from .errors import UnknownFamilyError
from .symmetry import IsotropyDescriptor

SUPPORTED = {
    ("I", 0): (0, 1),
    ("I", 1): (0, 1, 2),
    ("II", 1): (0, 1, 2),
}


@dataclass(frozen=True)
class FamilyId:
    family_type: str
    p: int
    m: int

    def __post_init__(self):
        ftype = str(self.family_type).upper()
        object.__setattr__(self, "family_type", ftype)
        try:
            object.__setattr__(self, "p", int(self.p))
            object.__setattr__(self, "m", int(self.m))
        except (TypeError, ValueError):
            raise UnknownFamilyError(f"p and m must be integers, got p={self.p!r}, m={self.m!r}") from None
        allowed = SUPPORTED.get((ftype, self.p))
        if allowed is None or self.m not in allowed:
            raise UnknownFamilyError(
                f"no cataloged family of type {self.family_type} with p={self.p}, m={self.m}; "
                "supported: type I with p=0, m in {0,1}; types I and II with p=1, m in {0,1,2}"
            )

    @property
    def kappa(self):
        """Base of the fractional power series: powers of ``d^(-1/kappa)``."""
        if self.family_type == "I" and self.p == 1 and self.m > 0:
            return 4
        return 2

    @property
    def N(self):
        return 2 + self.m if self.p == 0 else 5 + 2 * self.m

    def descriptor(self, d):
        return IsotropyDescriptor(self.p, self.m, d)

    @property
    def label(self):
        return f"{self.family_type}_p{self.p}_m{self.m}"

    @property
    def leading_sign(self):
        return -1.0 if self.family_type == "I" else 1.0

    def as_dict(self):
        return {"type": self.family_type, "p": self.p, "m": self.m}

    @classmethod
    def parse(cls, text):
        """Inverse of :attr:`label`, e.g. ``"II_p1_m2"``."""
        try:
            ftype, p, m = text.split("_")
            return cls(ftype, int(p.lstrip("p")), int(m.lstrip("m")))
        except ValueError as exc:
            if isinstance(exc, UnknownFamilyError):
                raise
            raise UnknownFamilyError(f"cannot parse family label {text!r}") from None


def catalog():
    """All cataloged families, in a fixed order."""
    out = []
    for (ftype, p), ms in SUPPORTED.items():
        out.extend(FamilyId(ftype, p, m) for m in ms)
    return out
