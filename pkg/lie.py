"""
Corchetes de Lie numéricos y pertenencia a subespacios generados.

[X, Y](h) = DX(h).Y(h) - DY(h).X(h). El término de transporte A = d/dx es lineal
y se deriva de forma exacta (D(A.)v = Av); el resto por diferencias centrales o,
si se pide, con las derivadas analíticas de los factores.

Incluye el escaneo de obstrucción para volatilidades locales phi(x, h(x)), el
corchete analítico de referencia y el margen para volatilidades de dirección
constante.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from errores import ErrorCondicionamiento, ErrorDominio, ErrorParametro
from espacio_curvas import (PESO_DEFECTO, CurvaForward, FuncionalLineal, FuncionPeso, MallaMadurez,
                            coordenadas_w, deriv, integral, norma_w)
from hjm import PasoFrechet, alpha_hjm, correccion_ito, derivada_reaccion_mu, frechet
from riccati import forma_cerrada_vasicek
from volatilidad import EstructuraVolatilidad, Expresion, FactorDireccionConstante, FactorLocal

logger = logging.getLogger(__name__)

ORDEN_DERIVADA_LIE = 4
COND_MAXIMA = 1e10
FACTOR_UMBRAL = 10.0
PISO_UMBRAL = 1e-10


# ------------------ Campos vectoriales ------------------
@dataclass
class CampoVectorial:
    """X(h) = (Ah si transporte) + reaccion(h)."""
    reaccion: Callable[[CurvaForward], CurvaForward]
    transporte: bool = False
    orden: int = ORDEN_DERIVADA_LIE
    # d/dx X(h) analítica, si se conoce
    derivada_x: Optional[Callable[[CurvaForward], Optional[CurvaForward]]] = None
    # D reaccion(h).v analítica; si falta se usan diferencias centrales
    derivada_reaccion: Optional[Callable[[CurvaForward, CurvaForward], CurvaForward]] = None

    def __call__(self, h: CurvaForward) -> CurvaForward:
        valor = self.reaccion(h)
        if self.transporte:
            valor = deriv(h, self.orden) + valor
        return valor

    def derivada(self, h: CurvaForward, v: CurvaForward, paso: PasoFrechet,
                 av: Optional[CurvaForward] = None) -> CurvaForward:
        """DX(h).v; `av` reemplaza a Av en el término de transporte."""
        if self.derivada_reaccion is not None:
            valor = self.derivada_reaccion(h, v)
        else:
            valor = frechet(self.reaccion, h, v, paso)
        if self.transporte:
            valor = (deriv(v, self.orden) if av is None else av) + valor
        return valor

    def transporte_de(self, h: CurvaForward) -> CurvaForward:
        """A(X(h)), analítica cuando hay derivada_x."""
        if self.derivada_x is not None:
            analitica = self.derivada_x(h)
            if analitica is not None:
                return analitica
        return deriv(self(h), self.orden)


def campo_mu_vectorial(sigma: EstructuraVolatilidad, orden: int = ORDEN_DERIVADA_LIE,
                       analitica: bool = False) -> CampoVectorial:
    derivada = (lambda h, v: derivada_reaccion_mu(sigma, h, v)) if analitica else None
    return CampoVectorial(lambda h: alpha_hjm(sigma, h) - correccion_ito(sigma, h) * 0.5, True, orden,
                          derivada_reaccion=derivada)


def campo_sigma_vectorial(sigma: EstructuraVolatilidad, i: int = 0, analitica: bool = False) -> CampoVectorial:
    factor = sigma.factores[i]
    return CampoVectorial(lambda h: factor.evaluar(h),
                          derivada_x=lambda h: factor.derivada_x(h, ORDEN_DERIVADA_LIE),
                          derivada_reaccion=factor.derivada if analitica else None)


def _como_campo(X) -> CampoVectorial:
    return X if isinstance(X, CampoVectorial) else CampoVectorial(X)


def terminos_corchete(X: Union[CampoVectorial, Callable], Y: Union[CampoVectorial, Callable],
                      h: CurvaForward, paso: PasoFrechet = PasoFrechet()) -> Tuple[CurvaForward, CurvaForward]:
    """(DX(h).Y(h), DY(h).X(h))."""
    X, Y = _como_campo(X), _como_campo(Y)
    ay = Y.transporte_de(h) if X.transporte else None
    ax = X.transporte_de(h) if Y.transporte else None
    return X.derivada(h, Y(h), paso, ay), Y.derivada(h, X(h), paso, ax)


def corchete_lie(X: Union[CampoVectorial, Callable], Y: Union[CampoVectorial, Callable],
                 h: CurvaForward, paso: PasoFrechet = PasoFrechet()) -> CurvaForward:
    """[X, Y](h) = DX(h).Y(h) - DY(h).X(h)."""
    dxy, dyx = terminos_corchete(X, Y, h, paso)
    return dxy - dyx


# ------------------ Pertenencia a un span ------------------
@dataclass
class ResultadoSpan:
    residuo_rel: float
    coeficientes: List[float]
    condicion: float
    proyeccion: Optional[CurvaForward] = None
    residuo_abs: float = 0.0


def residuo_span(v: CurvaForward, base: Sequence[CurvaForward],
                 peso: FuncionPeso = PESO_DEFECTO, piso: float = 1e-14) -> ResultadoSpan:
    """||v - P v||_w / max(||v||_w, piso) con P la proyección ortogonal en H_w sobre span(base).

    La condición se mide con columnas normalizadas; una base con rango incompleto
    o condición > 1e10 lanza ErrorCondicionamiento.
    """
    objetivo = coordenadas_w(v, peso)
    norma_v = float(np.linalg.norm(objetivo))
    denominador = max(norma_v, piso)
    if not base:
        return ResultadoSpan(min(1.0, norma_v / denominador), [], 1.0, CurvaForward.cero(v.malla), norma_v)
    M = np.column_stack([coordenadas_w(b, peso) for b in base])
    normas = np.linalg.norm(M, axis=0)
    if np.any(normas == 0):
        raise ErrorCondicionamiento("La base contiene una curva nula")
    s = np.linalg.svd(M / normas, compute_uv=False)
    umbral = max(M.shape) * np.finfo(float).eps * s[0]
    condicion = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    if s[-1] <= umbral or condicion > COND_MAXIMA:
        raise ErrorCondicionamiento(f"Base numéricamente dependiente (condición {condicion:.3g})")
    coef, *_ = np.linalg.lstsq(M, objetivo, rcond=None)
    resto = float(np.linalg.norm(objetivo - M @ coef))
    proyeccion = CurvaForward.cero(v.malla)
    for c, b in zip(coef, base):
        proyeccion = proyeccion + b * float(c)
    return ResultadoSpan(resto / denominador, [float(c) for c in coef], condicion, proyeccion, resto)


@dataclass
class ReporteCorchete:
    """Corchete en una curva de prueba y su residuo relativo frente a la base."""
    corchete: CurvaForward
    base: List[CurvaForward]
    residuo_rel: float
    en_span: bool
    curva_prueba: CurvaForward
    coeficientes: List[float] = field(default_factory=list)
    condicion: float = 1.0
    residuo_abs: float = 0.0

    def a_dict(self) -> dict:
        return {"residual_rel": self.residuo_rel, "residual_abs": self.residuo_abs,
                "in_span": self.en_span, "coefficients": self.coeficientes,
                "conditioning": self.condicion, "short_rate": self.curva_prueba.tasa_corta}


def reporte_corchete(corchete: CurvaForward, base: List[CurvaForward], h: CurvaForward,
                     tol: float, peso: FuncionPeso = PESO_DEFECTO) -> ReporteCorchete:
    r = residuo_span(corchete, base, peso)
    return ReporteCorchete(corchete, base, r.residuo_rel, r.residuo_rel < tol, h,
                           r.coeficientes, r.condicion, r.residuo_abs)


# ------------------ Curvas de prueba ------------------
def _nelson_siegel(x, b0, b1, b2, tau):
    u = x / tau
    return b0 + b1 * np.exp(-u) + b2 * u * np.exp(-u)


def curvas_prueba(malla: MallaMadurez, beta: float = 0.5, rho: float = 0.02) -> List[CurvaForward]:
    """Las 12 curvas estándar: 3 planas, 3 jorobas crecientes, 3 decrecientes y 3
    miembros perturbados del conjunto singular de Vasicek(beta, rho). Todas positivas."""
    x = malla.nodos
    lam = forma_cerrada_vasicek(beta, malla).Lambda.valores
    base_sigma = -0.5 * rho * rho * lam ** 2
    valores = [np.full_like(x, c) for c in (0.01, 0.03, 0.06)]
    for params in ((0.04, -0.02, 0.01, 2.0), (0.05, -0.03, 0.02, 1.5), (0.03, -0.01, 0.015, 3.0),
                   (0.03, 0.02, -0.01, 2.0), (0.02, 0.03, -0.02, 1.0), (0.04, 0.01, -0.015, 2.5)):
        valores.append(_nelson_siegel(x, *params))
    valores.append(0.03 + base_sigma + 0.01 * lam + 0.002 * x * np.exp(-x))
    valores.append(0.02 + base_sigma + 0.02 * lam - 0.003 * np.exp(-2 * x))
    valores.append(0.05 + base_sigma - 0.01 * lam + 0.001 * np.sin(x) * np.exp(-0.5 * x))
    return [CurvaForward(malla, v) for v in valores]


# ------------------ Volatilidades locales ------------------
def corchete_local_analitico(phi: Expresion, h: CurvaForward) -> CurvaForward:
    """(d1 phi o h) + (phi o h) int (phi' o h)(phi o h) - 1/2 (phi'' o h)(phi o h)^2."""
    f, f_x, f_y, f_yy = (np.broadcast_to(a, h.valores.shape)
                         for a in phi.derivadas(h.nodos, h.valores))
    integrando = integral(h.con_valores(f_y * f)).valores
    return h.con_valores(f_x + f * integrando - 0.5 * f_yy * f * f)


@dataclass
class ReporteEscaneo:
    residuos: List[float]
    discrepancias_analiticas: List[float]
    linea_base: float
    umbral: float
    obstruido: bool
    omitidas: List[int] = field(default_factory=list)
    condiciones: List[float] = field(default_factory=list)

    @property
    def residuo_maximo(self) -> float:
        return max(self.residuos) if self.residuos else 0.0

    def a_dict(self) -> dict:
        return {"residuals": self.residuos, "analytic_mismatch": self.discrepancias_analiticas,
                "baseline": self.linea_base, "threshold": self.umbral,
                "max_residual": self.residuo_maximo, "obstructed": self.obstruido,
                "passes": not self.obstruido, "skipped_curves": self.omitidas,
                "conditioning": self.condiciones}


def _residuos_locales(phi: Expresion, curvas: Sequence[CurvaForward], epsilon: float,
                      paso: PasoFrechet, peso: FuncionPeso):
    sigma = EstructuraVolatilidad([FactorLocal(phi)], epsilon)
    mu = campo_mu_vectorial(sigma)
    s = campo_sigma_vectorial(sigma)
    residuos, discrepancias, omitidas, condiciones = [], [], [], []
    for i, h in enumerate(curvas):
        if not sigma.en_dominio(h):
            omitidas.append(i)
            continue
        try:
            numerico = corchete_lie(mu, s, h, paso)
            r = residuo_span(numerico, [s(h), mu(h)], peso)
        except (ErrorDominio, ErrorCondicionamiento) as e:
            logger.warning("Curva %d omitida: %s", i, e)
            omitidas.append(i)
            continue
        analitico = corchete_local_analitico(phi, h)
        escala = max(analitico.sup(), 1e-300)
        residuos.append(r.residuo_rel)
        discrepancias.append((numerico - analitico).sup() / escala)
        condiciones.append(r.condicion)
    return residuos, discrepancias, omitidas, condiciones


def linea_base_vasicek(curvas: Sequence[CurvaForward], beta: float = 0.5, rho: float = 0.02,
                       paso: PasoFrechet = PasoFrechet(), peso: FuncionPeso = PESO_DEFECTO) -> float:
    """Máximo residuo del caso phi = rho e^{-beta x}: el ruido de discretización de la malla."""
    residuos, *_ = _residuos_locales(Expresion.exponencial(rho, -beta), curvas, 0.0, paso, peso)
    return max(residuos, default=0.0)


def escaneo_obstruccion_local(phi: Expresion, curvas: Sequence[CurvaForward], epsilon: float = 0.0,
                              paso: PasoFrechet = PasoFrechet(), peso: FuncionPeso = PESO_DEFECTO,
                              beta_ref: float = 0.5, rho_ref: float = 0.02) -> ReporteEscaneo:
    """Residuo de [mu, sigma](h) frente a <sigma(h), mu(h)> en cada curva con argumento > epsilon.

    Hay obstrucción si el residuo máximo supera 10 veces la línea base de Vasicek.
    """
    if not curvas:
        raise ErrorParametro("El escaneo necesita al menos una curva")
    base = linea_base_vasicek(curvas, beta_ref, rho_ref, paso, peso)
    umbral = max(FACTOR_UMBRAL * base, PISO_UMBRAL)
    residuos, discrepancias, omitidas, condiciones = _residuos_locales(phi, curvas, epsilon, paso, peso)
    if omitidas:
        logger.info("%d curvas fuera del dominio", len(omitidas))
    obstruido = bool(residuos) and max(residuos) > umbral
    return ReporteEscaneo(residuos, discrepancias, base, umbral, obstruido, omitidas, condiciones)


# ------------------ Dirección constante ------------------
@dataclass
class ReporteMargen:
    residuos: List[float]
    margen: float

    def a_dict(self) -> dict:
        return {"residuals": self.residuos, "margin": self.margen}


def margen_direccion_constante(phi: Expresion, direccion: Union[CurvaForward, Expresion],
                               curvas: Sequence[CurvaForward],
                               funcional: Optional[FuncionalLineal] = None, epsilon: float = 0.0,
                               paso: PasoFrechet = PasoFrechet(),
                               peso: FuncionPeso = PESO_DEFECTO) -> ReporteMargen:
    """Residuo de [mu, sigma](h) frente a <lambda> para sigma = phi(l(h)) lambda.

    Queda cerca de cero cuando lambda resuelve la ecuación de Riccati asociada y es
    positivo en otro caso; el margen es el mínimo sobre las curvas.
    """
    factor = FactorDireccionConstante(phi, direccion, funcional)
    sigma = EstructuraVolatilidad([factor], epsilon)
    mu = campo_mu_vectorial(sigma)
    s = campo_sigma_vectorial(sigma)
    residuos = []
    for h in curvas:
        if not sigma.en_dominio(h):
            continue
        corchete = corchete_lie(mu, s, h, paso)
        residuos.append(residuo_span(corchete, [factor.lambda_en(h.malla)], peso).residuo_rel)
    if not residuos:
        raise ErrorDominio("Ninguna curva de prueba está en el dominio")
    return ReporteMargen(residuos, min(residuos))


# ------------------ Involutividad de primer orden ------------------
TOL_SPAN = 1e-6


@dataclass
class ReporteInvolutividad:
    """Residuos de [mu, sigma_i] y [sigma_i, sigma_j] frente a <mu, sigma_1, ..., sigma_d> por curva."""
    residuos: List[List[float]]
    condiciones: List[float]
    linea_base: float
    umbral: float
    omitidas: List[int] = field(default_factory=list)
    escaneo_local: Optional[ReporteEscaneo] = None

    @property
    def residuo_maximo(self) -> float:
        return max((max(r) for r in self.residuos if r), default=0.0)

    @property
    def pasa(self) -> bool:
        if self.escaneo_local is not None and self.escaneo_local.obstruido:
            return False
        return bool(self.residuos) and self.residuo_maximo < self.umbral

    def a_dict(self) -> dict:
        datos = {"residuals": self.residuos, "conditioning": self.condiciones,
                 "baseline": self.linea_base, "threshold": self.umbral,
                 "max_residual": self.residuo_maximo, "skipped_curves": self.omitidas,
                 "passes": self.pasa}
        if self.escaneo_local is not None:
            datos["local_scan"] = self.escaneo_local.a_dict()
        return datos


def chequeo_involutividad(sigma: EstructuraVolatilidad, curvas: Sequence[CurvaForward],
                          paso: PasoFrechet = PasoFrechet(), peso: FuncionPeso = PESO_DEFECTO,
                          tol_minima: float = TOL_SPAN) -> ReporteInvolutividad:
    """Corchetes de primer orden de {mu, sigma_1, ..., sigma_d} frente a su span en cada curva.

    Las curvas fuera del dominio o donde la base es dependiente se omiten y se
    informan. Para una volatilidad local se adjunta además el escaneo de obstrucción.
    """
    if not curvas:
        raise ErrorParametro("Se necesita al menos una curva")
    base_vasicek = linea_base_vasicek(curvas, paso=paso, peso=peso)
    umbral = max(FACTOR_UMBRAL * base_vasicek, tol_minima)
    mu = campo_mu_vectorial(sigma)
    campos = [campo_sigma_vectorial(sigma, i) for i in range(sigma.d)]
    pares = [(mu, s) for s in campos]
    pares += [(campos[i], campos[j]) for i in range(sigma.d) for j in range(i + 1, sigma.d)]

    reporte = ReporteInvolutividad([], [], base_vasicek, umbral)
    for k, h in enumerate(curvas):
        if not sigma.en_dominio(h):
            reporte.omitidas.append(k)
            continue
        try:
            generadores = [mu(h)] + [s(h) for s in campos]
            residuos, condicion = [], 1.0
            for X, Y in pares:
                r = residuo_span(corchete_lie(X, Y, h, paso), generadores, peso)
                residuos.append(r.residuo_rel)
                condicion = max(condicion, r.condicion)
        except (ErrorDominio, ErrorCondicionamiento) as e:
            logger.warning("Curva %d omitida: %s", k, e)
            reporte.omitidas.append(k)
            continue
        reporte.residuos.append(residuos)
        reporte.condiciones.append(condicion)

    factor = sigma.factores[0]
    if sigma.d == 1 and isinstance(factor, FactorLocal):
        reporte.escaneo_local = escaneo_obstruccion_local(factor.phi, curvas, sigma.epsilon, paso, peso)
    return reporte
