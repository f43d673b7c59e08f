"""
Realizaciones afines de dimensión dos: Hull-White Vasicek (hwv) y Hull-White CIR (hwcir).

r_t = Psi(t) + Lambda' Z_t, con
    hwv:   dZ = -beta Z dt + rho dW
    hwcir: dZ = -beta Z dt + rho sqrt(c(t) + Z) dW

También: descomposición en el conjunto singular Sigma, ecuación de Volterra para
c(t), simulación de la realización y precios de bonos cupón cero.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.interpolate import CubicSpline

import ruido
import validaciones
from errores import ErrorDominio, ErrorPadAgotado, ErrorParametro
from espacio_curvas import (PESO_DEFECTO, CurvaForward, FuncionPeso, MallaMadurez, deriv, evaluar_en,
                            integral, norma_w)
from hjm import EPSILON_DEFECTO, ConfiguracionHJM, flujo_trayectoria
from lie import residuo_span
from riccati import (SolucionRiccati, forma_cerrada_cir, forma_cerrada_vasicek, lambda_b_cir,
                     lambda_b_vasicek)
from volatilidad import EstructuraVolatilidad

logger = logging.getLogger(__name__)

ESQUEMAS_HWV = ("exacta", "euler", "exponencial")


def malla_tiempos(horizonte: float, dt: float) -> np.ndarray:
    if not (validaciones.validar_positivo(horizonte) and validaciones.validar_positivo(dt)):
        raise ErrorParametro("horizonte y dt deben ser > 0")
    n = ruido.factor_refinamiento(horizonte, dt)
    return np.linspace(0.0, horizonte, n + 1)


def _spline(r_estrella: CurvaForward) -> CubicSpline:
    return CubicSpline(r_estrella.nodos, r_estrella.valores)


def precio_bono(h: CurvaForward, vencimiento: float) -> float:
    """P = exp(-int_0^T h(x) dx)."""
    if vencimiento < 0 or vencimiento > h.malla.x_max + 1e-9:
        raise ErrorDominio(f"Vencimiento {vencimiento} fuera de [0, {h.malla.x_max}]")
    return math.exp(-float(evaluar_en(integral(h), vencimiento)))


# ------------------ Realización ------------------
@dataclass
class RealizacionAfin:
    tipo: str
    beta: float
    rho: float
    riccati: SolucionRiccati
    r_estrella: CurvaForward
    tiempos: np.ndarray
    b_t: np.ndarray
    caminos: List[CurvaForward]
    m_t: Optional[np.ndarray] = None
    c_t: Optional[np.ndarray] = None
    c_volterra: Optional[np.ndarray] = None
    epsilon: float = EPSILON_DEFECTO

    @property
    def dt(self) -> float:
        return float(self.tiempos[1] - self.tiempos[0])

    @property
    def carga(self) -> CurvaForward:
        """B = Lambda', fija en el tiempo."""
        return self.riccati.B

    def psi(self, k: int) -> CurvaForward:
        return self.caminos[k]

    def curva(self, k: int, z: float) -> CurvaForward:
        return self.caminos[k] + self.carga * float(z)

    def tasa_corta_determinista(self) -> np.ndarray:
        return np.array([c.tasa_corta for c in self.caminos])

    def funcion_a(self, k: int) -> CurvaForward:
        """A_HWV(t, .) = Psi(t) - Lambda' m(t) o A_HWCIR(t, .) = Psi(t) - Lambda' c(t)."""
        nivel = self.m_t[k] if self.tipo == "hwv" else self.c_t[k]
        return self.caminos[k] - self.carga * float(nivel)

    def a_en_cero(self) -> np.ndarray:
        return np.array([self.funcion_a(k).tasa_corta for k in range(len(self.tiempos))])

    def a_dict(self) -> dict:
        datos = {
            "model": self.tipo, "beta": self.beta, "rho": self.rho, "epsilon": self.epsilon,
            "grid": self.r_estrella.malla.a_dict(),
            "dt": self.dt, "horizon": float(self.tiempos[-1]),
            "r_star": self.r_estrella.valores.tolist(),
            "times": self.tiempos.tolist(), "b": self.b_t.tolist(),
            "deterministic_short_rate": self.tasa_corta_determinista().tolist(),
        }
        if self.m_t is not None:
            datos["m"] = self.m_t.tolist()
            datos["A_at_zero"] = self.a_en_cero().tolist()
        if self.c_t is not None:
            datos["c"] = self.c_t.tolist()
            datos["c_volterra"] = self.c_volterra.tolist()
        return datos


def realizacion_desde_dict(datos: dict) -> RealizacionAfin:
    """Reconstruye la realización volviendo a ajustarla (el ajuste es determinista)."""
    try:
        malla = MallaMadurez.desde_dict(datos["grid"])
        r_estrella = CurvaForward(malla, datos["r_star"])
        args = (r_estrella, float(datos["beta"]), float(datos["rho"]),
                float(datos["horizon"]), float(datos["dt"]))
        modelo = datos["model"]
    except (KeyError, TypeError, ValueError) as e:
        raise ErrorParametro(f"Artefacto de modelo inválido: {e}")
    if modelo == "hwv":
        return ajuste_hwv(*args)
    if modelo == "hwcir":
        return ajuste_hwcir(*args, epsilon=float(datos.get("epsilon", EPSILON_DEFECTO)))
    raise ErrorParametro(f"Modelo desconocido: {modelo}")


def _validar_horizonte(r_estrella: CurvaForward, horizonte: float):
    if horizonte > r_estrella.pad_restante + 1e-12:
        raise ErrorPadAgotado(
            f"Horizonte {horizonte} mayor que el pad disponible {r_estrella.pad_restante}")


# ------------------ Hull-White Vasicek ------------------
def ajuste_hwv(r_estrella: CurvaForward, beta: float, rho: float,
               horizonte: float = 1.0, dt: float = 1e-3) -> RealizacionAfin:
    """Ajusta Hull-White Vasicek a la curva inicial r*.

    b(t) = d/dt r*(t) + beta r*(t) + (rho^2 / 2beta)(1 - e^{-2 beta t})
    Psi(t)(x) = r*(x + t) + (rho^2/2)(Lambda(x + t)^2 - Lambda(x)^2)
    m' = b - beta m, m(0) = r*(0), por trapecios exponenciales.
    """
    if not (validaciones.validar_no_negativo(beta) and validaciones.validar_no_negativo(rho)):
        raise ErrorParametro("beta y rho deben ser >= 0")
    _validar_horizonte(r_estrella, horizonte)
    malla = r_estrella.malla
    tiempos = malla_tiempos(horizonte, dt)
    sol = forma_cerrada_vasicek(beta, malla)
    spline = _spline(r_estrella)
    x = malla.nodos

    r_t = spline(tiempos)
    dr = np.gradient(r_t, tiempos, edge_order=2)
    if beta > 0:
        varianza = rho * rho * (-np.expm1(-2 * beta * tiempos)) / (2 * beta)
    else:
        varianza = rho * rho * tiempos
    b_t = dr + beta * r_t + varianza

    lam_x = sol.Lambda.valores
    caminos = []
    for t in tiempos:
        lam_xt, _ = lambda_b_vasicek(beta, x + t)
        valores = spline(np.minimum(x + t, malla.longitud)) + 0.5 * rho * rho * (lam_xt ** 2 - lam_x ** 2)
        caminos.append(CurvaForward(malla, valores, r_estrella.pad_consumido + t))

    paso = tiempos[1] - tiempos[0]
    e = math.exp(-beta * paso)
    m_t = np.empty_like(tiempos)
    m_t[0] = r_t[0]
    for k in range(len(tiempos) - 1):
        m_t[k + 1] = e * m_t[k] + 0.5 * paso * (e * b_t[k] + b_t[k + 1])
    return RealizacionAfin("hwv", beta, rho, sol, r_estrella, tiempos, b_t, caminos, m_t=m_t)


# ------------------ Hull-White CIR ------------------
def nucleo_cir(beta: float, rho: float, s) -> np.ndarray:
    """(Lambda Lambda')(s) para CIR."""
    lam, b = lambda_b_cir(beta, rho, s)
    return lam * b


def volterra_c(r_estrella: CurvaForward, beta: float, rho: float, tiempos: np.ndarray,
               epsilon: float = EPSILON_DEFECTO) -> np.ndarray:
    """c(t) = r*(t) + rho^2 int_0^t c(s) (Lambda Lambda')(t - s) ds por trapecios.

    El núcleo vale 0 en s = t, así que cada paso es explícito. Exige r*(0) > epsilon.
    """
    if r_estrella.tasa_corta <= epsilon:
        raise ErrorDominio(f"r*(0) = {r_estrella.tasa_corta} no supera epsilon = {epsilon}")
    f = _spline(r_estrella)(tiempos)
    if rho == 0:
        return f.copy()
    paso = tiempos[1] - tiempos[0]
    K = nucleo_cir(beta, rho, tiempos)
    c = np.empty_like(f)
    c[0] = f[0]
    for k in range(1, len(tiempos)):
        suma = 0.5 * K[k] * c[0] + np.dot(K[k - 1:0:-1], c[1:k])
        c[k] = f[k] + rho * rho * paso * suma
    return c


def residuo_volterra(r_estrella: CurvaForward, beta: float, rho: float, tiempos: np.ndarray,
                     c: np.ndarray) -> float:
    """max_t |c(t) - r*(t) - rho^2 int c K| con la integral por Simpson."""
    f = _spline(r_estrella)(tiempos)
    if rho == 0:
        return float(np.max(np.abs(c - f)))
    K = nucleo_cir(beta, rho, tiempos)
    peor = abs(c[0] - f[0])
    for k in range(2, len(tiempos)):
        integral_k = simpson(c[:k + 1] * K[k::-1], x=tiempos[:k + 1])
        peor = max(peor, abs(c[k] - f[k] - rho * rho * integral_k))
    return float(peor)


def _malla_para_flujo(malla: MallaMadurez, dt: float):
    """Malla con paso dt y los mismos extremos si el paso de `malla` es múltiplo de dt."""
    salto = malla.paso / dt
    if salto < 1:
        inverso = dt / malla.paso
        if abs(inverso - round(inverso)) > 1e-9 * inverso:
            logger.info("dt=%.4g no es múltiplo del paso de malla; desplazamientos interpolados", dt)
        return malla, 1
    if abs(salto - round(salto)) > 1e-9 * salto:
        logger.info("El paso de malla %.4g no es múltiplo de dt=%.4g; desplazamientos interpolados",
                    malla.paso, dt)
        return malla, 1
    salto = int(round(salto))
    return MallaMadurez(malla.x_max, malla.pad, (malla.n_puntos - 1) * salto + 1), salto


def ajuste_hwcir(r_estrella: CurvaForward, beta: float, rho: float, horizonte: float = 1.0,
                 dt: float = 1e-3, epsilon: float = EPSILON_DEFECTO) -> RealizacionAfin:
    """Ajusta Hull-White CIR: Psi(t) = Fl_t^nu(r*), c(t) = Psi(t)(0), b(t) = beta c + c'."""
    if not validaciones.validar_positivo(rho) or not validaciones.validar_no_negativo(beta):
        raise ErrorParametro("hwcir requiere rho > 0 y beta >= 0")
    if r_estrella.tasa_corta <= epsilon:
        raise ErrorDominio(f"r*(0) = {r_estrella.tasa_corta} no supera epsilon = {epsilon}")
    _validar_horizonte(r_estrella, horizonte)
    tiempos = malla_tiempos(horizonte, dt)
    malla = r_estrella.malla
    sol = forma_cerrada_cir(beta, rho, malla)

    # El flujo corre en una malla de paso dt para que cada desplazamiento sea exacto
    fina, salto = _malla_para_flujo(malla, dt)
    if salto > 1:
        r_fina = CurvaForward(fina, _spline(r_estrella)(fina.nodos), r_estrella.pad_consumido)
        sol_fina = forma_cerrada_cir(beta, rho, fina)
    else:
        r_fina, sol_fina = r_estrella, sol
    sigma = EstructuraVolatilidad.cir(rho, sol_fina.B, epsilon)
    resultado = flujo_trayectoria("nu", sigma, r_fina, tiempos)
    if not resultado.completo:
        raise ErrorDominio(f"El flujo de nu sale del dominio en t = {resultado.tiempo_alcanzado:.6g}")
    caminos = [CurvaForward(malla, c.valores[::salto], c.pad_consumido) for c in resultado.curvas]
    c_t = np.array([c.tasa_corta for c in caminos])
    b_t = beta * c_t + np.gradient(c_t, tiempos, edge_order=2)
    c_vol = volterra_c(r_estrella, beta, rho, tiempos, epsilon)
    dif = float(np.max(np.abs(c_t - c_vol)))
    if dif > 1e-5:
        logger.warning("c(t) del flujo y de Volterra difieren en %.3g", dif)
    return RealizacionAfin("hwcir", beta, rho, sol, r_estrella, tiempos, b_t, caminos,
                           c_t=c_t, c_volterra=c_vol, epsilon=epsilon)


def residuo_b_c(modelo: RealizacionAfin) -> float:
    """Reconstruye c integrando c' = b - beta c y devuelve el error máximo."""
    c = modelo.c_t
    reconstruida = c[0] + cumulative_trapezoid(modelo.b_t - modelo.beta * c, modelo.tiempos, initial=0.0)
    return float(np.max(np.abs(reconstruida - c)))


# ------------------ Conjunto singular ------------------
@dataclass
class DescomposicionSingular:
    """h ~ a1 + a2 Lambda^2 + a3 Lambda y la restricción del tipo de modelo."""
    coeficientes: List[float]
    residuo: float
    es_miembro: bool
    defecto_restriccion: float
    tolerancia: float
    escala_restriccion: float
    sup_curva: float
    residuo_nu: float = 0.0

    def residuo_invariancia(self) -> float:
        """Máximo entre el residuo del ajuste relativo a sup|h| y el defecto de la restricción
        relativo a su escala (sup|h| si rho = 0)."""
        escala = self.escala_restriccion if self.escala_restriccion > 0 else self.sup_curva
        return max(self.residuo / max(self.sup_curva, 1e-12),
                   self.defecto_restriccion / max(escala, 1e-12))

    def a_dict(self) -> dict:
        return {"coefficients": self.coeficientes, "residual": self.residuo,
                "is_member": self.es_miembro, "constraint_check": self.defecto_restriccion,
                "tolerance": self.tolerancia, "nu_span_residual": self.residuo_nu}


def _nodos_validos(h: CurvaForward) -> int:
    malla = h.malla
    return int(math.floor((malla.longitud - h.pad_consumido) / malla.paso + 1e-9)) + 1


def descomposicion_singular(h: CurvaForward, sol: SolucionRiccati, tipo: str, rho: float,
                            tol: Optional[float] = None,
                            peso: FuncionPeso = PESO_DEFECTO) -> DescomposicionSingular:
    """Mínimos cuadrados sobre span{1, Lambda^2, Lambda} en los nodos no consumidos.

    Pertenece a Sigma si el ajuste y la restricción (Vasicek a2 = -rho^2/2,
    CIR a2 = -(rho^2/2) a1) caen bajo tol = 1e-6 (1 + ||h||_w).
    """
    if sol.malla != h.malla:
        raise ErrorParametro("La solución de Riccati vive en otra malla")
    if tipo not in ("vasicek", "ho_lee", "cir"):
        raise ErrorParametro(f"Tipo desconocido: {tipo}")
    n = _nodos_validos(h)
    lam = sol.Lambda.valores[:n]
    X = np.column_stack([np.ones(n), lam ** 2, lam])
    y = h.valores[:n]
    normas = np.linalg.norm(X, axis=0)
    condicion = np.linalg.cond(X / normas)
    if condicion > 1e10:
        logger.warning("Base {1, Lambda^2, Lambda} mal condicionada (%.3g)", condicion)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    a1, a2, a3 = (float(c) for c in coef)
    residuo = float(np.max(np.abs(X @ coef - y)))

    media_rho2 = 0.5 * rho * rho
    if tipo == "cir":
        esperado = -media_rho2 * a1
        escala = media_rho2 * max(abs(a1), 1e-12)
    else:
        esperado = -media_rho2
        escala = media_rho2
    defecto = abs(a2 - esperado)
    if tol is None:
        tol = 1e-6 * (1.0 + norma_w(h, peso))

    # nu(h) = h' + alpha_HJM(h) debe quedar en <lambda>
    factor = rho * rho * (h.tasa_corta if tipo == "cir" else 1.0)
    nu = deriv(h) + sol.B * sol.Lambda * factor
    residuo_nu = residuo_span(nu, [sol.B], peso).residuo_rel

    return DescomposicionSingular([a1, a2, a3], residuo, residuo < tol and defecto < tol, defecto,
                                  tol, escala, float(np.max(np.abs(y))), residuo_nu)


def punto_singular(sol: SolucionRiccati, tipo: str, rho: float, a1: float, a3: float) -> CurvaForward:
    """Miembro de Sigma: a1 + a2 Lambda^2 + a3 Lambda con a2 fijado por la restricción."""
    a2 = -0.5 * rho * rho * (a1 if tipo == "cir" else 1.0)
    lam = sol.Lambda
    return lam * lam * a2 + lam * a3 + a1


# ------------------ Simulación ------------------
@dataclass
class EnsambleRealizacion:
    tiempos: np.ndarray
    factores: np.ndarray
    tasas_cortas: np.ndarray
    vencimientos: List[float]
    precios: np.ndarray
    eventos_piso: List[int] = field(default_factory=list)

    @property
    def fraccion_sin_piso(self) -> float:
        return float(np.mean([e == 0 for e in self.eventos_piso])) if self.eventos_piso else 1.0

    def resumen(self) -> dict:
        final = self.factores[:, -1]
        return {
            "n_paths": int(self.factores.shape[0]),
            "times": self.tiempos.tolist(),
            "mean_short_rate": self.tasas_cortas.mean(axis=0).tolist(),
            "Z_final_mean": float(final.mean()),
            "Z_final_var": float(final.var(ddof=1)) if final.size > 1 else 0.0,
            "maturities": self.vencimientos,
            "mean_bond_prices_final": self.precios[:, -1, :].mean(axis=0).tolist(),
            "floor_events": int(sum(self.eventos_piso)),
            "floor_free_fraction": self.fraccion_sin_piso,
        }


def _camino_factor(modelo: RealizacionAfin, dW: np.ndarray, dt: float, factor: int, esquema: str,
                   epsilon: float):
    n = dW.size
    z = np.zeros(n + 1)
    pisos = 0
    beta, rho = modelo.beta, modelo.rho
    if modelo.tipo == "hwv":
        e = math.exp(-beta * dt)
        if beta > 0:
            desvio = rho * math.sqrt(-math.expm1(-2 * beta * dt) / (2 * beta))
        else:
            desvio = rho * math.sqrt(dt)
        for k in range(n):
            if esquema == "exacta":
                z[k + 1] = e * z[k] + desvio * dW[k] / math.sqrt(dt)
            elif esquema == "exponencial":
                z[k + 1] = e * (z[k] + rho * dW[k])
            else:
                z[k + 1] = z[k] - beta * z[k] * dt + rho * dW[k]
        return z, 0
    for k in range(n):
        nivel = modelo.c_t[k * factor] + z[k]
        if nivel <= epsilon:
            pisos += 1
            nivel = epsilon
        z[k + 1] = z[k] - beta * z[k] * dt + rho * math.sqrt(nivel) * dW[k]
    return z, pisos


def simular_realizacion(modelo: RealizacionAfin, cfg: ConfiguracionHJM, n_caminos: int,
                        esquema: str = "exacta", vencimientos: Sequence[float] = (1.0, 2.0, 5.0),
                        incrementos: Optional[Callable[[int], np.ndarray]] = None,
                        trabajadores: int = 1) -> EnsambleRealizacion:
    """Simula Z en la malla de tiempos cfg.paso_tiempo (múltiplo del paso del ajuste).

    hwv admite las actualizaciones 'exacta' (transición OU), 'euler' y
    'exponencial' (e^{-beta dt}(Z + rho dW)); hwcir usa Euler con truncamiento completo.
    """
    if esquema not in ESQUEMAS_HWV:
        raise ErrorParametro(f"Esquema desconocido: {esquema}")
    dt = cfg.paso_tiempo
    factor = ruido.factor_refinamiento(dt, modelo.dt)
    n_pasos = cfg.n_pasos
    if n_pasos * factor > len(modelo.tiempos) - 1:
        raise ErrorParametro("El horizonte de simulación supera el del ajuste")
    for T in vencimientos:
        if T < 0 or T > modelo.r_estrella.malla.x_max:
            raise ErrorParametro(f"Vencimiento {T} fuera de la malla")

    def camino(i: int):
        dW = incrementos(i) if incrementos is not None else ruido.incrementos(cfg.semilla, i, n_pasos, dt)
        dW = np.asarray(dW, dtype=float).reshape(-1)
        if dW.size != n_pasos:
            raise ErrorParametro(f"El camino {i} tiene {dW.size} incrementos, se esperaban {n_pasos}")
        return _camino_factor(modelo, dW, dt, factor, esquema, cfg.epsilon)

    resultados = ruido.mapear_caminos(camino, n_caminos, trabajadores)
    Z = np.array([r[0] for r in resultados])
    indices = np.arange(n_pasos + 1) * factor
    tiempos = modelo.tiempos[indices]
    base_corta = np.array([modelo.caminos[k].tasa_corta for k in indices])

    lam_T = np.array([float(evaluar_en(modelo.riccati.Lambda, T)) for T in vencimientos])
    int_psi = np.array([[float(evaluar_en(integral(modelo.caminos[k]), T)) for T in vencimientos]
                        for k in indices])
    precios = np.exp(-(int_psi[None, :, :] + Z[:, :, None] * lam_T[None, None, :]))
    eventos = [int(r[1]) for r in resultados]
    if any(eventos):
        logger.warning("%d eventos de piso en %d caminos", sum(eventos), n_caminos)
    return EnsambleRealizacion(tiempos, Z, base_corta[None, :] + Z, list(vencimientos), precios, eventos)
