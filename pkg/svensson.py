"""
Familia de Svensson y su dinámica consistente.

G_S(x, z) = z1 + z2 e^{-z5 x} + z3 x e^{-z5 x} + z4 x e^{-z6 x}

- SvenssonPunto, svensson_evaluar, svensson_ajustar (mínimos cuadrados separables)
- construir_ell: funcional l con l(g1) = l(g2) = l(g3) = 0, l(g4) = 1
- EstadoSvenssonConsistente / paso_dinamica_consistente / simular_svensson
- chequeo_corchete_svensson: [mu, sigma](h) en <g2> para sigma(h) = sqrt(alpha l(h)) g2,
  evaluado sobre curvas_corchete_svensson
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

import ruido
import validaciones
from errores import ErrorCondicionamiento, ErrorConvergencia, ErrorDominio, ErrorParametro
from espacio_curvas import (PESO_DEFECTO, CurvaForward, FuncionalLineal, FuncionPeso, MallaMadurez,
                            aplicar_funcional, norma_w)
from hjm import PasoFrechet
from lie import (FACTOR_UMBRAL, PISO_UMBRAL, ReporteCorchete, campo_mu_vectorial,
                 campo_sigma_vectorial, curvas_prueba, linea_base_vasicek, reporte_corchete,
                 terminos_corchete)
from volatilidad import EstructuraVolatilidad, Expresion, FactorDireccionConstante, FactorExpresion

logger = logging.getLogger(__name__)

TENORES_DEFECTO = (1.0, 3.0, 5.0, 10.0)
INICIOS_DEFECTO = (0.1, 0.3, 1.0, 3.0)
TOL_IDENTIFICABILIDAD = 1e-3
TOL_COEFICIENTE = 1e-4


# ------------------ Familia paramétrica ------------------
@dataclass(frozen=True)
class SvenssonPunto:
    z1: float
    z2: float
    z3: float
    z4: float
    z5: float
    z6: float

    def __post_init__(self):
        if not validaciones.validar_finito(self.como_tupla()):
            raise ErrorParametro("Los parámetros de Svensson deben ser finitos")
        if not (self.z5 > 0 and self.z6 > 0):
            raise ErrorParametro(f"Se requiere z5, z6 > 0, recibido ({self.z5}, {self.z6})")

    def como_tupla(self) -> Tuple[float, ...]:
        return (self.z1, self.z2, self.z3, self.z4, self.z5, self.z6)

    def a_dict(self) -> dict:
        return {"z": list(self.como_tupla())}


def _diseno(x: np.ndarray, z5: float, z6: float) -> np.ndarray:
    e5 = np.exp(-z5 * x)
    return np.column_stack([np.ones_like(x), e5, x * e5, x * np.exp(-z6 * x)])


def svensson_evaluar(z: SvenssonPunto, malla: MallaMadurez) -> CurvaForward:
    x = malla.nodos
    return CurvaForward(malla, _diseno(x, z.z5, z.z6) @ np.array(z.como_tupla()[:4]))


@dataclass
class ResultadoSvensson:
    """Ajuste con desajuste sup y RMS en [0, x_max] y las marcas de calidad."""
    punto: SvenssonPunto
    desajuste_sup: float
    desajuste_rms: float
    convergio: bool
    identificable: bool
    evaluaciones: int = 0
    aviso: Optional[ErrorConvergencia] = None

    def a_dict(self) -> dict:
        return {"z": list(self.punto.como_tupla()), "misfit_sup": self.desajuste_sup,
                "misfit_rms": self.desajuste_rms, "converged": self.convergio,
                "identifiable": self.identificable, "evaluations": self.evaluaciones,
                "warning": str(self.aviso) if self.aviso else None}


def _lineales(x: np.ndarray, y: np.ndarray, z5: float, z6: float):
    M = _diseno(x, z5, z6)
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    return coef, M @ coef - y


def svensson_ajustar(h: CurvaForward, inicial: Optional[SvenssonPunto] = None,
                     max_evaluaciones: int = 2000) -> ResultadoSvensson:
    """Ajuste separable: (z5, z6) por Levenberg-Marquardt sobre log z, (z1..z4) lineales.

    Se arranca desde `inicial` y desde la grilla {0.1, 0.3, 1, 3}^2 con z5 != z6 y
    se queda el menor residuo. Si |z5 - z6| < 1e-3 el punto no es identificable.
    """
    if not validaciones.validar_entero_minimo(max_evaluaciones, 1):
        raise ErrorParametro("max_evaluaciones debe ser >= 1")
    x = h.nodos[: h.malla.indice_x_max + 1]
    y = h.reportable()

    def residuos(u):
        return _lineales(x, y, math.exp(u[0]), math.exp(u[1]))[1]

    inicios = [(a, b) for a, b in itertools.product(INICIOS_DEFECTO, repeat=2) if a != b]
    if inicial is not None:
        inicios.insert(0, (inicial.z5, inicial.z6))

    mejor = None
    evaluaciones = 0
    for z5, z6 in inicios:
        try:
            r = least_squares(residuos, np.log([z5, z6]), method="lm", xtol=1e-15, ftol=1e-15,
                              gtol=1e-15, max_nfev=max_evaluaciones)
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.debug("Arranque (%g, %g) descartado: %s", z5, z6, e)
            continue
        evaluaciones += r.nfev
        if mejor is None or r.cost < mejor.cost:
            mejor = r
    if mejor is None:
        raise ErrorCondicionamiento("Ningún arranque del ajuste de Svensson fue evaluable")

    z5, z6 = (float(v) for v in np.exp(mejor.x))
    coef, resto = _lineales(x, y, z5, z6)
    punto = SvenssonPunto(*(float(c) for c in coef), z5, z6)
    # status 0 es agotar max_nfev; los demás son criterios de parada satisfechos
    convergio = bool(mejor.status > 0)
    aviso = None
    if not convergio:
        aviso = ErrorConvergencia(f"Sin convergencia tras {mejor.nfev} evaluaciones: {mejor.message}")
        logger.warning("%s", aviso)
    identificable = abs(z5 - z6) >= TOL_IDENTIFICABILIDAD
    if not identificable:
        logger.info("z5 ~ z6 = %.6g: los términos x e^{-z x} no se distinguen", z5)
    return ResultadoSvensson(punto, float(np.max(np.abs(resto))), float(np.sqrt(np.mean(resto ** 2))),
                             convergio, identificable, evaluaciones, aviso)


# ------------------ Funcional l ------------------
def base_svensson(alpha: float, x) -> np.ndarray:
    """Columnas g1 = 1, g2 = e^{-alpha x}, g3 = x e^{-alpha x}, g4 = x e^{-2 alpha x}."""
    return _diseno(np.asarray(x, dtype=float), alpha, 2 * alpha)


def construir_ell(alpha: float, tenores: Sequence[float] = TENORES_DEFECTO,
                  malla: Optional[MallaMadurez] = None) -> FuncionalLineal:
    """Combinación sum_k w_k h(x_k) con l(g_j) = delta_{j4}."""
    if not validaciones.validar_positivo(alpha):
        raise ErrorParametro(f"alpha debe ser > 0, recibido {alpha}")
    tenores = [float(t) for t in tenores]
    if len(tenores) != 4 or len(set(tenores)) != 4 or min(tenores) <= 0:
        raise ErrorCondicionamiento("Se necesitan 4 tenores distintos y positivos")
    if malla is not None and max(tenores) > malla.x_max:
        raise ErrorParametro(f"Tenor {max(tenores)} fuera de (0, {malla.x_max}]")
    M = base_svensson(alpha, tenores).T
    condicion = np.linalg.cond(M)
    if not np.isfinite(condicion) or condicion > 1e12:
        raise ErrorCondicionamiento(
            f"Sistema de tenores {tenores} singular (condición {condicion:.3g}); elija otros tenores")
    pesos = np.linalg.solve(M, np.array([0.0, 0.0, 0.0, 1.0]))
    return FuncionalLineal.combinacion(pesos, tenores)


def volatilidad_svensson(alpha: float, ell: FuncionalLineal) -> EstructuraVolatilidad:
    """sigma(h) = sqrt(alpha l(h)) e^{-alpha x} en U = {l > 0}."""
    phi = Expresion((FactorExpresion("sqrt", "y", (0.0, float(alpha))),))
    return EstructuraVolatilidad([FactorDireccionConstante(phi, Expresion.exponencial(1.0, -alpha), ell)])


# ------------------ Dinámica consistente ------------------
@dataclass(frozen=True)
class EstadoSvenssonConsistente:
    alpha: float
    Z1: float
    Z2: float
    Z3: float
    Z4: float

    def __post_init__(self):
        if not validaciones.validar_positivo(self.alpha):
            raise ErrorParametro("alpha debe ser > 0")
        if self.Z4 < 0:
            raise ErrorParametro(f"Z4 debe ser >= 0, recibido {self.Z4}")

    @property
    def factores(self) -> Tuple[float, float, float, float]:
        return (self.Z1, self.Z2, self.Z3, self.Z4)

    def a_punto(self) -> SvenssonPunto:
        return SvenssonPunto(self.Z1, self.Z2, self.Z3, self.Z4, self.alpha, 2 * self.alpha)

    def curva(self, malla: MallaMadurez) -> CurvaForward:
        return svensson_evaluar(self.a_punto(), malla)


def paso_dinamica_consistente(estado: EstadoSvenssonConsistente, dt: float,
                              dW: float) -> EstadoSvenssonConsistente:
    """Z1 fijo, Z3 e Z4 decaen exactamente, Z2 por Euler:
    dZ2 = (Z3 + Z4 - alpha Z2) dt + sqrt(alpha Z4) dW."""
    a = estado.alpha
    z2 = estado.Z2 + (estado.Z3 + estado.Z4 - a * estado.Z2) * dt + math.sqrt(a * estado.Z4) * float(dW)
    return EstadoSvenssonConsistente(a, estado.Z1, z2, estado.Z3 * math.exp(-a * dt),
                                     estado.Z4 * math.exp(-2 * a * dt))


@dataclass
class TrayectoriasSvensson:
    tiempos: np.ndarray
    factores: np.ndarray  # (caminos, pasos + 1, 4)
    alpha: float

    def estado(self, camino: int, k: int) -> EstadoSvenssonConsistente:
        return EstadoSvenssonConsistente(self.alpha, *(float(v) for v in self.factores[camino, k]))


def simular_svensson(inicial: EstadoSvenssonConsistente, dt: float, horizonte: float, n_caminos: int,
                     semilla: int = 0, trabajadores: int = 1) -> TrayectoriasSvensson:
    n = ruido.factor_refinamiento(horizonte, dt)

    def camino(i: int) -> np.ndarray:
        dW = ruido.incrementos(semilla, i, n, dt)[:, 0]
        salida = np.empty((n + 1, 4))
        estado = inicial
        salida[0] = estado.factores
        for k in range(n):
            estado = paso_dinamica_consistente(estado, dt, dW[k])
            salida[k + 1] = estado.factores
        return salida

    factores = np.array(ruido.mapear_caminos(camino, n_caminos, trabajadores))
    return TrayectoriasSvensson(np.linspace(0.0, horizonte, n + 1), factores, inicial.alpha)


def residuo_base(h: CurvaForward, alpha: float) -> float:
    """Residuo sup de mínimos cuadrados de h contra span{g1, ..., g4}."""
    M = base_svensson(alpha, h.nodos)
    coef, *_ = np.linalg.lstsq(M, h.valores, rcond=None)
    return float(np.max(np.abs(M @ coef - h.valores)))


# ------------------ Corchete ------------------
@dataclass
class ChequeoSvensson:
    reportes: List[ReporteCorchete]
    coeficientes: List[float]
    coeficientes_analiticos: List[float]
    ell_sigma: List[float]
    linea_base: float
    umbral: float
    tol_coeficiente: float = TOL_COEFICIENTE
    discrepancias: List[float] = field(default_factory=list)
    # Residuo absoluto sobre max(||DX.Y||_w, ||DY.X||_w), útil cuando el corchete se anula
    residuos_escalados: List[float] = field(default_factory=list)

    @property
    def pasa(self) -> bool:
        return (all(r.residuo_rel < self.umbral for r in self.reportes)
                and all(d <= self.tol_coeficiente for d in self.discrepancias))

    def a_dict(self) -> dict:
        return {"brackets": [r.a_dict() for r in self.reportes],
                "coefficients": self.coeficientes,
                "analytic_coefficients": self.coeficientes_analiticos,
                "coefficient_mismatch": self.discrepancias,
                "scaled_residuals": self.residuos_escalados,
                "ell_of_sigma": self.ell_sigma, "baseline": self.linea_base,
                "threshold": self.umbral, "passes": self.pasa}


def chequeo_corchete_svensson(alpha: float, ell: FuncionalLineal, curvas: Sequence[CurvaForward],
                              paso: PasoFrechet = PasoFrechet(), peso: FuncionPeso = PESO_DEFECTO,
                              rho_ref: float = 0.02) -> ChequeoSvensson:
    """[mu, sigma](h) frente a <g2> en cada curva, con el residuo relativo a ||[mu, sigma](h)||_w.

    Las derivadas de mu y sigma son las analíticas de los factores; `paso` solo
    interviene en la línea base de Vasicek con beta = alpha, cuyo décuplo es el
    umbral. El coeficiente de g2 se compara con
    -alpha sqrt(alpha l(h)) - alpha l(mu(h)) / (2 sqrt(alpha l(h))).

    En las curvas de la familia (z5 = alpha, z6 = 2 alpha) el corchete es nulo y el
    residuo relativo no es informativo; ver curvas_corchete_svensson.
    """
    if not curvas:
        raise ErrorParametro("Se necesita al menos una curva")
    sigma = volatilidad_svensson(alpha, ell)
    mu = campo_mu_vectorial(sigma, analitica=True)
    s = campo_sigma_vectorial(sigma, analitica=True)
    malla = curvas[0].malla
    g2 = CurvaForward(malla, np.exp(-alpha * malla.nodos))
    base = linea_base_vasicek(curvas_prueba(malla, alpha, rho_ref), alpha, rho_ref, paso, peso)
    umbral = max(FACTOR_UMBRAL * base, PISO_UMBRAL)

    chequeo = ChequeoSvensson([], [], [], [], base, umbral)
    for h in curvas:
        nivel = aplicar_funcional(ell, h)
        if nivel <= 0:
            raise ErrorDominio(f"l(h) = {nivel:.6g} <= 0: la curva está fuera de U")
        raiz = math.sqrt(alpha * nivel)
        dmu_s, ds_mu = terminos_corchete(mu, s, h, paso)
        reporte = reporte_corchete(dmu_s - ds_mu, [g2], h, umbral, peso)
        escala = max(norma_w(dmu_s, peso), norma_w(ds_mu, peso), 1e-300)
        analitico = -alpha * raiz - alpha * aplicar_funcional(ell, mu(h)) / (2 * raiz)
        numerico = reporte.coeficientes[0]
        chequeo.reportes.append(reporte)
        chequeo.coeficientes.append(numerico)
        chequeo.coeficientes_analiticos.append(analitico)
        chequeo.discrepancias.append(abs(numerico - analitico) / max(1.0, abs(analitico)))
        chequeo.residuos_escalados.append(reporte.residuo_abs / escala)
        chequeo.ell_sigma.append(abs(aplicar_funcional(ell, s(h))))
    return chequeo


def curvas_prueba_svensson(malla: MallaMadurez, alpha: float) -> List[CurvaForward]:
    """Curvas consistentes (z5 = alpha, z6 = 2 alpha) con l(h) = Z4 > 0."""
    factores = ((0.03, -0.01, 0.005, 0.002), (0.04, 0.01, -0.004, 0.001),
                (0.02, -0.005, 0.01, 0.003), (0.05, -0.02, 0.0, 0.004))
    return [EstadoSvenssonConsistente(alpha, *z).curva(malla) for z in factores]


def curvas_corchete_svensson(malla: MallaMadurez, alpha: float,
                             tenores: Sequence[float] = TENORES_DEFECTO,
                             amplitud: float = 2e-5) -> List[CurvaForward]:
    """Curvas consistentes más amplitud * e^{-x} prod_k (x - x_k).

    La perturbación se anula en los tenores, así que l(h) = Z4 se conserva y el
    corchete es un múltiplo no nulo de g2.
    """
    x = malla.nodos
    perturbacion = amplitud * np.exp(-x) * np.prod([x - t for t in tenores], axis=0)
    return [h + CurvaForward(malla, perturbacion) for h in curvas_prueba_svensson(malla, alpha)]
