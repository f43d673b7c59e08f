"""
Ecuación de Riccati Lambda' + (a/2) Lambda^2 + b Lambda = lambda0, Lambda(0) = 0.

Incluye el integrador RK4 sobre la malla, las formas cerradas de Vasicek (y Ho-Lee)
y CIR, las funciones A de la parte afín y el residuo de la ecuación.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

import validaciones
from errores import ErrorParametro, ErrorRiccati
from espacio_curvas import CurvaForward, MallaMadurez

logger = logging.getLogger(__name__)

COTA_EXPLOSION = 1e8


@dataclass(frozen=True)
class ParametrosRiccati:
    """a: coeficiente cuadrático (a = 2 psi), b: coeficiente lineal, lambda0: lado derecho."""
    a: float
    b: float
    lambda0: float = 1.0

    def __post_init__(self):
        if not (validaciones.validar_finito(self.a) and validaciones.validar_finito(self.b)):
            raise ErrorParametro("a y b deben ser finitos")
        if not validaciones.validar_finito(self.lambda0) or self.lambda0 == 0:
            raise ErrorParametro("lambda0 = 0 implica lambda = 0; se requiere lambda0 != 0")

    @property
    def tipo(self) -> str:
        if self.a == 0:
            return "ho_lee" if self.b == 0 else "vasicek"
        return "cir"

    def lado_derecho(self, lam):
        return self.lambda0 - 0.5 * self.a * lam * lam - self.b * lam


@dataclass(frozen=True)
class SolucionRiccati:
    Lambda: CurvaForward
    B: CurvaForward
    tipo: str
    parametros: ParametrosRiccati

    @property
    def malla(self) -> MallaMadurez:
        return self.Lambda.malla


def resolver_riccati(p: ParametrosRiccati, malla: MallaMadurez) -> SolucionRiccati:
    """RK4 con paso igual al de la malla; B es el lado derecho evaluado en Lambda."""
    h = malla.paso
    lam = np.zeros(malla.n_puntos)
    f = p.lado_derecho
    for i in range(malla.n_puntos - 1):
        y = lam[i]
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        lam[i + 1] = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        if not math.isfinite(lam[i + 1]) or abs(lam[i + 1]) > COTA_EXPLOSION:
            raise ErrorRiccati(f"La solución explota cerca de x = {malla.nodos[i + 1]:.4g}")
    return SolucionRiccati(CurvaForward(malla, lam), CurvaForward(malla, f(lam)), p.tipo, p)


def forma_cerrada_vasicek(beta: float, malla: MallaMadurez) -> SolucionRiccati:
    """Lambda = (1 - e^{-beta x}) / beta, B = e^{-beta x}; beta = 0 da Ho-Lee (Lambda = x)."""
    if not validaciones.validar_no_negativo(beta):
        raise ErrorParametro(f"beta debe ser >= 0, recibido {beta}")
    lam, b_v = lambda_b_vasicek(beta, malla.nodos)
    tipo = "ho_lee" if beta == 0 else "vasicek"
    return SolucionRiccati(CurvaForward(malla, lam), CurvaForward(malla, b_v),
                           tipo, ParametrosRiccati(0.0, float(beta)))


def constantes_cir(beta: float, rho: float) -> Tuple[float, float, float]:
    """(gamma, k, c) con gamma = sqrt(beta^2 + 2 rho^2), k = gamma + beta, c = (gamma - beta)/(gamma + beta)."""
    gamma = math.sqrt(beta * beta + 2 * rho * rho)
    k = gamma + beta
    return gamma, k, (gamma - beta) / k


def forma_cerrada_cir(beta: float, rho: float, malla: MallaMadurez) -> SolucionRiccati:
    """Lambda = 2(e^{gx} - 1) / ((g + beta)(e^{gx} - 1) + 2g).

    B = Lambda' = (4 g^2 / k^2) e^{gx} / (e^{gx} + c)^2, escrito con e^{-gx} para no desbordar.
    """
    if not validaciones.validar_positivo(rho):
        raise ErrorParametro(f"rho debe ser > 0, recibido {rho}")
    if not validaciones.validar_no_negativo(beta):
        raise ErrorParametro(f"beta debe ser >= 0, recibido {beta}")
    lam, b_cir = lambda_b_cir(beta, rho, malla.nodos)
    return SolucionRiccati(CurvaForward(malla, lam), CurvaForward(malla, b_cir),
                           "cir", ParametrosRiccati(rho * rho, beta))


def lambda_b_cir(beta: float, rho: float, x) -> Tuple[np.ndarray, np.ndarray]:
    """Lambda y B de CIR en puntos arbitrarios x >= 0."""
    gamma, k, c = constantes_cir(beta, rho)
    x = np.asarray(x, dtype=float)
    e = np.exp(-gamma * x)
    q = -np.expm1(-gamma * x)
    lam = 2 * q / (k * q + 2 * gamma * e)
    return lam, (4 * gamma ** 2 / k ** 2) * e / (1 + c * e) ** 2


def lambda_b_vasicek(beta: float, x) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if beta == 0:
        return x.copy(), np.ones_like(x)
    return -np.expm1(-beta * x) / beta, np.exp(-beta * x)


def limite_cir(beta: float, rho: float) -> float:
    """Límite de Lambda cuando x -> infinito: 2 / (gamma + beta)."""
    gamma, k, _ = constantes_cir(beta, rho)
    return 2.0 / k


def funciones_a(sol: SolucionRiccati, b_param: float, rho: float) -> CurvaForward:
    """A_V = b Lambda - (rho^2/2) Lambda^2 (Vasicek, Ho-Lee) o A_CIR = b Lambda."""
    if sol.tipo == "cir":
        return sol.Lambda * b_param
    return sol.Lambda * b_param - sol.Lambda * sol.Lambda * (0.5 * rho * rho)


def residuo(sol: SolucionRiccati) -> float:
    """max_x |B + (a/2) Lambda^2 + b Lambda - lambda0| usando B como Lambda'."""
    p = sol.parametros
    lam = sol.Lambda.valores
    return float(np.max(np.abs(sol.B.valores - p.lado_derecho(lam))))


def verificar_independencia(sol: SolucionRiccati, tol: float = 1e-8) -> bool:
    """lambda = B y lambda * int lambda = B * Lambda deben ser linealmente independientes."""
    m = np.vstack([sol.B.valores, sol.B.valores * sol.Lambda.valores])
    s = np.linalg.svd(m, compute_uv=False)
    independientes = s[-1] > tol * s[0]
    if not independientes:
        logger.warning("lambda y lambda * int lambda son numéricamente dependientes")
    return bool(independientes)
