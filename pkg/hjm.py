"""
Campos vectoriales del modelo HJM y sus integradores.

- alpha_hjm: deriva de no arbitraje sum_i sigma_i * int sigma_i
- frechet: derivada de Fréchet por diferencias centrales
- campo_mu / campo_nu: los campos mu(h) y nu(h) = Ah + alpha_hjm(h)
- paso_euler_mild: un paso de Euler de la solución mild (incremento y luego desplazamiento)
- flujo / flujo_trayectoria: flujo determinista de mu o nu con splitting de Strang
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

import validaciones
from errores import ErrorDominio, ErrorPadAgotado, ErrorParametro
from espacio_curvas import (PESO_DEFECTO, CurvaForward, FuncionPeso, deriv, desplazar,
                            integral, norma_w)
from volatilidad import EstructuraVolatilidad

logger = logging.getLogger(__name__)

EPS_FD_DEFECTO = 1e-5
EPSILON_DEFECTO = 1e-6
DT_DEFECTO = 1e-3
HORIZONTE_DEFECTO = 1.0


@dataclass(frozen=True)
class ConfiguracionHJM:
    """Paso de tiempo, horizonte, piso epsilon del dominio U = {ev0 > epsilon} y semilla."""
    paso_tiempo: float = DT_DEFECTO
    horizonte: float = HORIZONTE_DEFECTO
    epsilon: float = EPSILON_DEFECTO
    semilla: int = 0

    def __post_init__(self):
        if not validaciones.validar_positivo(self.paso_tiempo):
            raise ErrorParametro(f"El paso de tiempo debe ser > 0, recibido {self.paso_tiempo}")
        if not validaciones.validar_positivo(self.horizonte) or self.paso_tiempo > self.horizonte:
            raise ErrorParametro("Se requiere 0 < paso_tiempo <= horizonte")
        if not validaciones.validar_no_negativo(self.epsilon):
            raise ErrorParametro("epsilon debe ser >= 0")
        if not validaciones.validar_entero_minimo(self.semilla, 0):
            raise ErrorParametro("La semilla debe ser un entero >= 0")

    @property
    def n_pasos(self) -> int:
        return int(round(self.horizonte / self.paso_tiempo))


@dataclass(frozen=True)
class PasoFrechet:
    eps_fd: float = EPS_FD_DEFECTO

    def __post_init__(self):
        if not validaciones.validar_paso_relativo(self.eps_fd):
            raise ErrorParametro(f"eps_fd debe estar en (0, 1), recibido {self.eps_fd}")


MapaCurvas = Callable[[CurvaForward], CurvaForward]


def _deriva(sigmas: Sequence[CurvaForward], malla) -> CurvaForward:
    total = CurvaForward.cero(malla)
    for s in sigmas:
        total = total + s * integral(s)
    return total


def alpha_hjm(sigma: EstructuraVolatilidad, h: CurvaForward, piso: Optional[float] = None) -> CurvaForward:
    """alpha_HJM(h) = sum_i sigma_i(h) * int_0^x sigma_i(h). Vale 0 en x = 0."""
    if piso is None:
        sigma.verificar_dominio(h)
    return h.con_valores(_deriva(sigma.evaluar(h, piso), h.malla).valores)


def frechet(F: MapaCurvas, h: CurvaForward, v: CurvaForward, paso: PasoFrechet = PasoFrechet(),
            peso: FuncionPeso = PESO_DEFECTO) -> CurvaForward:
    """DF(h).v por diferencia central (F(h + dv) - F(h - dv)) / 2d.

    d = eps_fd * max(1, ||h||_w) / max(1, ||v||_w); si la curva perturbada sale del
    dominio se divide d por 10 hasta tres veces.
    """
    delta = paso.eps_fd * max(1.0, norma_w(h, peso)) / max(1.0, norma_w(v, peso))
    for intento in range(4):
        try:
            arriba = F(h + v * delta)
            abajo = F(h - v * delta)
            return (arriba - abajo) * (1.0 / (2.0 * delta))
        except ErrorDominio as e:
            if intento == 3:
                raise ErrorDominio(f"Derivada de Fréchet: la perturbación sale del dominio: {e}")
            logger.debug("Reduciendo el paso de Fréchet %g", delta)
            delta /= 10.0


def correccion_ito(sigma: EstructuraVolatilidad, h: CurvaForward,
                   paso: Optional[PasoFrechet] = None) -> CurvaForward:
    """sum_i D sigma_i(h).sigma_i(h), analítica salvo que se pida `paso` numérico."""
    total = CurvaForward.cero(h.malla)
    for factor in sigma.factores:
        s = factor.evaluar(h)
        if paso is None:
            total = total + factor.derivada(h, s)
        elif not factor.es_constante:
            total = total + frechet(factor.evaluar, h, s, paso)
    return total


def derivada_reaccion_mu(sigma: EstructuraVolatilidad, h: CurvaForward, v: CurvaForward) -> CurvaForward:
    """D(alpha_HJM - 1/2 sum_i D sigma_i.sigma_i)(h).v con las derivadas analíticas de cada factor.

    D alpha_HJM.v = sum_i (D sigma_i.v) int sigma_i + sigma_i int (D sigma_i.v)
    D(D sigma_i.sigma_i).v = D^2 sigma_i[sigma_i, v] + D sigma_i.(D sigma_i.v)
    """
    sigma.verificar_dominio(h)
    total = CurvaForward.cero(h.malla)
    for factor in sigma.factores:
        s = factor.evaluar(h)
        ds = factor.derivada(h, v)
        total = total + ds * integral(s) + s * integral(ds)
        ito = factor.derivada_segunda(h, s, v) + factor.derivada(h, ds)
        total = total - ito * 0.5
    return h.con_valores(total.valores)


def campo_mu(sigma: EstructuraVolatilidad, h: CurvaForward,
             paso: Optional[PasoFrechet] = None, orden_derivada: int = 2) -> CurvaForward:
    """mu(h) = Ah + alpha_HJM(h) - 1/2 sum_i D sigma_i(h).sigma_i(h)."""
    return campo_nu(sigma, h, orden_derivada) - correccion_ito(sigma, h, paso) * 0.5


def campo_nu(sigma: EstructuraVolatilidad, h: CurvaForward, orden_derivada: int = 2) -> CurvaForward:
    """nu(h) = Ah + alpha_HJM(h)."""
    return deriv(h, orden_derivada) + alpha_hjm(sigma, h)


def paso_euler_mild(sigma: EstructuraVolatilidad, h: CurvaForward, dW: Sequence[float],
                    cfg: ConfiguracionHJM) -> Tuple[CurvaForward, bool]:
    """S_dt(h + alpha_HJM(h) dt + sum_i sigma_i(h) dW_i).

    Si h sale del dominio se aplica el piso ev0 := max(ev0, epsilon) dentro de sigma
    (truncamiento completo) y se devuelve la marca True.
    """
    dW = np.atleast_1d(np.asarray(dW, dtype=float))
    if dW.size != sigma.d:
        raise ErrorParametro(f"Se esperaban {sigma.d} incrementos brownianos, llegaron {dW.size}")
    dt = cfg.paso_tiempo
    if dt > h.pad_restante + 1e-12:
        raise ErrorPadAgotado(f"Pad restante {h.pad_restante:.6g} menor que el paso {dt}")
    piso = None
    truncado = False
    if not sigma.en_dominio(h):
        piso = cfg.epsilon
        truncado = True
    sigmas = sigma.evaluar(h, piso)
    nueva = h + _deriva(sigmas, h.malla) * dt
    for s, dw in zip(sigmas, dW):
        nueva = nueva + s * float(dw)
    return desplazar(nueva, dt), truncado


# ------------------ Flujo determinista ------------------
@dataclass
class ResultadoFlujo:
    """Instantáneas del flujo en los tiempos pedidos; `completo` es False si se salió del dominio."""
    tiempos: List[float] = field(default_factory=list)
    curvas: List[CurvaForward] = field(default_factory=list)
    completo: bool = True
    tiempo_alcanzado: float = 0.0

    @property
    def curva(self) -> CurvaForward:
        return self.curvas[-1]


def _reaccion(campo: str, sigma: EstructuraVolatilidad, u: CurvaForward) -> CurvaForward:
    # Parte del campo sin el transporte A u
    if campo == "nu":
        return alpha_hjm(sigma, u)
    return alpha_hjm(sigma, u) - correccion_ito(sigma, u) * 0.5


def _rk4(campo, sigma, u: CurvaForward, tau: float) -> CurvaForward:
    k1 = _reaccion(campo, sigma, u)
    k2 = _reaccion(campo, sigma, u + k1 * (tau / 2))
    k3 = _reaccion(campo, sigma, u + k2 * (tau / 2))
    k4 = _reaccion(campo, sigma, u + k3 * tau)
    return u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (tau / 6.0)


def _paso_strang(campo, sigma, u: CurvaForward, tau: float) -> CurvaForward:
    u = _rk4(campo, sigma, u, tau / 2)
    u = desplazar(u, tau)
    return _rk4(campo, sigma, u, tau / 2)


def flujo_trayectoria(campo: str, sigma: EstructuraVolatilidad, r_estrella: CurvaForward,
                      tiempos: Sequence[float]) -> ResultadoFlujo:
    """Fl_t(r*) del campo 'mu' o 'nu' en cada tiempo pedido.

    Avanza con pasos de Strang de exactamente un paso de malla (desplazamientos
    exactos de índices) y RK4 para la reacción; un tiempo que no es múltiplo del
    paso se alcanza con un último paso fraccionario sobre una copia.
    """
    if campo not in ("mu", "nu"):
        raise ErrorParametro(f"Campo desconocido: {campo}")
    tiempos = [float(t) for t in tiempos]
    if any(t < 0 for t in tiempos) or sorted(tiempos) != tiempos:
        raise ErrorParametro("Los tiempos del flujo deben ser >= 0 y crecientes")
    if tiempos and tiempos[-1] > r_estrella.pad_restante + 1e-12:
        raise ErrorPadAgotado(
            f"Horizonte {tiempos[-1]} mayor que el pad restante {r_estrella.pad_restante}")
    sigma.verificar_dominio(r_estrella)

    paso = r_estrella.malla.paso
    resultado = ResultadoFlujo()
    u = r_estrella
    pasos_dados = 0
    try:
        for t in tiempos:
            objetivo = int(math.floor(t / paso + 1e-9))
            while pasos_dados < objetivo:
                u = _paso_strang(campo, sigma, u, paso)
                pasos_dados += 1
                resultado.tiempo_alcanzado = pasos_dados * paso
            resto = t - pasos_dados * paso
            instantanea = _paso_strang(campo, sigma, u, resto) if resto > 1e-12 else u
            resultado.tiempos.append(t)
            resultado.curvas.append(instantanea)
            resultado.tiempo_alcanzado = t
    except ErrorDominio as e:
        logger.warning("El flujo sale del dominio en t=%.6g: %s", resultado.tiempo_alcanzado, e)
        resultado.completo = False
        if not resultado.curvas:
            resultado.tiempos.append(resultado.tiempo_alcanzado)
            resultado.curvas.append(u)
    return resultado


def flujo(campo: str, sigma: EstructuraVolatilidad, r_estrella: CurvaForward, t: float) -> ResultadoFlujo:
    return flujo_trayectoria(campo, sigma, r_estrella, [t])
