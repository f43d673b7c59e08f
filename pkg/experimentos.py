"""
Experimentos numéricos sobre las realizaciones afines.

- ejecutar_equivalencia: trayectorias de Euler del HJM completo frente a la
  realización afín con los mismos incrementos brownianos, para varios dt
- ejecutar_invariancia: residuo de la descomposición en Sigma a lo largo de
  trayectorias que parten de Sigma (o de un control negativo fuera de Sigma)
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

import ruido
import validaciones
from errores import ErrorDominio, ErrorParametro, ErrorPadAgotado
from espacio_curvas import CurvaForward, MallaMadurez
from hjm import EPSILON_DEFECTO, ConfiguracionHJM, paso_euler_mild
from modelos_afines import (RealizacionAfin, ajuste_hwcir, ajuste_hwv, descomposicion_singular,
                            punto_singular, simular_realizacion)
from riccati import forma_cerrada_cir, forma_cerrada_vasicek
from volatilidad import EstructuraVolatilidad

logger = logging.getLogger(__name__)

PASOS_DEFECTO = (4e-3, 2e-3, 1e-3)
X_MAX_EXPERIMENTO = 5.0
TOL_BRECHA = 1e-2
RANGO_ORDEN = (0.8, 1.2)
# Por debajo de esta brecha no se ajusta un orden (trayectorias deterministas idénticas)
BRECHA_NULA = 1e-12
TOL_HOMOGENEIDAD = 1e-6
# Paso máximo del ajuste de Hull-White con el que se mide la homogeneidad temporal
DT_HOMOGENEIDAD = 1e-3


# ------------------ Utilidades ------------------
def malla_experimento(x_max: float, horizonte: float, paso: float) -> MallaMadurez:
    """Malla cuyo paso es el dt más fino, con pad igual al horizonte."""
    return MallaMadurez.con_paso(x_max, horizonte, paso)


def remuestrear(r_estrella: CurvaForward, malla: MallaMadurez) -> CurvaForward:
    if malla == r_estrella.malla:
        return r_estrella
    if malla.longitud > r_estrella.malla.longitud - r_estrella.pad_consumido + 1e-12:
        raise ErrorPadAgotado(
            f"La curva inicial cubre [0, {r_estrella.malla.longitud}] y el experimento necesita "
            f"[0, {malla.longitud}]")
    spline = CubicSpline(r_estrella.nodos, r_estrella.valores)
    return CurvaForward(malla, spline(malla.nodos))


def _estructura(tipo: str, modelo: RealizacionAfin, epsilon: float) -> EstructuraVolatilidad:
    if tipo == "hwv":
        return EstructuraVolatilidad.vasicek(modelo.rho, modelo.beta)
    return EstructuraVolatilidad.cir(modelo.rho, modelo.carga, epsilon)


def _ajustar(tipo: str, r_estrella: CurvaForward, beta: float, rho: float, horizonte: float,
             dt: float, epsilon: float) -> RealizacionAfin:
    if tipo == "hwv":
        return ajuste_hwv(r_estrella, beta, rho, horizonte, dt)
    if tipo == "hwcir":
        return ajuste_hwcir(r_estrella, beta, rho, horizonte, dt, epsilon)
    raise ErrorParametro(f"Modelo desconocido: {tipo}")


def _validar_pasos(pasos: Sequence[float]) -> List[float]:
    pasos = [float(p) for p in pasos]
    if not pasos or not all(validaciones.validar_positivo(p) for p in pasos):
        raise ErrorParametro("Se necesita al menos un dt > 0")
    if not validaciones.validar_estrictamente_decreciente(pasos):
        raise ErrorParametro(f"La lista de dt debe ser estrictamente decreciente: {pasos}")
    for p in pasos:
        ruido.factor_refinamiento(p, pasos[-1])
    return pasos


def ajustar_orden(pasos: Sequence[float], brechas: Sequence[float]) -> Optional[float]:
    """Pendiente de log(brecha) frente a log(dt); None si alguna brecha es nula."""
    if len(pasos) < 2 or min(brechas) <= BRECHA_NULA:
        return None
    pendiente, _ = np.polyfit(np.log(pasos), np.log(brechas), 1)
    return float(pendiente)


# ------------------ Equivalencia ------------------
@dataclass
class ReporteEquivalencia:
    tipo: str
    pasos: List[float]
    brechas_medias: List[float]
    brechas_maximas: List[float]
    orden: Optional[float]
    intervalo_orden: Optional[Tuple[float, float]]
    n_caminos: int
    tolerancia: float = TOL_BRECHA
    rango_orden: Tuple[float, float] = RANGO_ORDEN
    eventos_piso_hjm: int = 0
    eventos_piso_realizacion: int = 0
    fraccion_sin_piso: float = 1.0

    @property
    def brecha_final(self) -> float:
        return self.brechas_maximas[-1]

    @property
    def orden_valido(self) -> bool:
        if self.orden is None:
            return True
        return self.rango_orden[0] <= self.orden <= self.rango_orden[1]

    @property
    def pasa(self) -> bool:
        return self.brecha_final < self.tolerancia and self.orden_valido

    def a_dict(self) -> dict:
        return {
            "model": self.tipo, "dt": self.pasos, "n_paths": self.n_caminos,
            "mean_gap": self.brechas_medias, "max_gap": self.brechas_maximas,
            "order": self.orden,
            "order_ci95": list(self.intervalo_orden) if self.intervalo_orden else None,
            "order_range": list(self.rango_orden), "tolerance": self.tolerancia,
            "floor_events_hjm": self.eventos_piso_hjm,
            "floor_events_realization": self.eventos_piso_realizacion,
            "floor_free_fraction": self.fraccion_sin_piso, "passes": self.pasa,
        }


def _brecha_camino(sigma: EstructuraVolatilidad, modelo: RealizacionAfin, z: np.ndarray,
                   dW: np.ndarray, cfg: ConfiguracionHJM, factor: int) -> Tuple[float, int]:
    """sup_{t, x <= x_max} |r_t^HJM - (Psi(t) + Lambda' Z_t)| y eventos de piso del HJM."""
    h = modelo.r_estrella
    peor = 0.0
    pisos = 0
    for k in range(dW.shape[0]):
        h, truncado = paso_euler_mild(sigma, h, dW[k], cfg)
        pisos += int(truncado)
        realizacion = modelo.curva((k + 1) * factor, z[k + 1])
        peor = max(peor, float(np.max(np.abs(h.reportable() - realizacion.reportable()))))
    return peor, pisos


def ejecutar_equivalencia(tipo: str, r_estrella: CurvaForward, beta: float, rho: float,
                          pasos: Sequence[float] = PASOS_DEFECTO, n_caminos: int = 100,
                          semilla: int = 0, horizonte: float = 1.0,
                          epsilon: float = EPSILON_DEFECTO, x_max: float = X_MAX_EXPERIMENTO,
                          tolerancia: float = TOL_BRECHA, trabajadores: int = 1) -> ReporteEquivalencia:
    """Brecha por camino entre Euler del HJM y la realización (esquema de Euler para Z).

    La malla del experimento tiene paso igual al dt más fino; los incrementos
    gruesos son sumas de los finos, así que todas las resoluciones ven el mismo
    browniano.
    """
    pasos = _validar_pasos(pasos)
    dt_fino = pasos[-1]
    n_fino = ruido.factor_refinamiento(horizonte, dt_fino)
    malla = malla_experimento(min(x_max, r_estrella.malla.x_max), horizonte, dt_fino)
    r0 = remuestrear(r_estrella, malla)
    modelo = _ajustar(tipo, r0, beta, rho, horizonte, dt_fino, epsilon)
    finos = [ruido.incrementos(semilla, i, n_fino, dt_fino)[:, 0] for i in range(n_caminos)]

    medias, maximas, pisos_hjm, pisos_real = [], [], 0, 0
    por_camino = np.zeros((n_caminos, len(pasos)))
    sin_piso = np.ones(n_caminos, dtype=bool)
    for j, dt in enumerate(pasos):
        factor = ruido.factor_refinamiento(dt, dt_fino)
        cfg = ConfiguracionHJM(dt, horizonte, epsilon, semilla)
        sigma = _estructura(tipo, modelo, epsilon)
        gruesos = [ruido.agregar(f, factor) for f in finos]
        ensamble = simular_realizacion(modelo, cfg, n_caminos, "euler", vencimientos=(),
                                       incrementos=lambda i: gruesos[i], trabajadores=trabajadores)

        def camino(i: int):
            return _brecha_camino(sigma, modelo, ensamble.factores[i], gruesos[i], cfg, factor)

        resultados = ruido.mapear_caminos(camino, n_caminos, trabajadores)
        brechas = np.array([r[0] for r in resultados])
        por_camino[:, j] = brechas
        eventos = np.array([r[1] for r in resultados]) + np.array(ensamble.eventos_piso)
        sin_piso &= eventos == 0
        pisos_hjm += sum(r[1] for r in resultados)
        pisos_real += sum(ensamble.eventos_piso)
        medias.append(float(brechas.mean()))
        maximas.append(float(brechas.max()))
        logger.info("%s dt=%.4g: brecha media %.3e, máxima %.3e", tipo, dt, medias[-1], maximas[-1])

    orden = ajustar_orden(pasos, medias)
    intervalo = None
    if orden is not None and n_caminos > 1 and np.all(por_camino > BRECHA_NULA):
        pendientes = np.array([ajustar_orden(pasos, fila) for fila in por_camino])
        radio = 1.96 * pendientes.std(ddof=1) / math.sqrt(n_caminos)
        intervalo = (float(pendientes.mean() - radio), float(pendientes.mean() + radio))
    return ReporteEquivalencia(tipo, pasos, medias, maximas, orden, intervalo, n_caminos, tolerancia,
                               eventos_piso_hjm=pisos_hjm, eventos_piso_realizacion=pisos_real,
                               fraccion_sin_piso=float(sin_piso.mean()))


# ------------------ Invariancia ------------------
@dataclass
class ReporteInvariancia:
    tipo: str
    tiempos: List[float]
    residuos: List[float]  # máximo sobre caminos en cada tiempo
    tolerancia: float
    homogeneidad: float
    n_caminos: int
    eventos_piso: int = 0
    control: bool = False
    coeficientes_iniciales: List[float] = field(default_factory=list)
    tolerancia_homogeneidad: float = TOL_HOMOGENEIDAD

    @property
    def residuo_maximo(self) -> float:
        return max(self.residuos)

    @property
    def homogenea(self) -> bool:
        """max_t |b(t) - b(0)| bajo tolerancia; sin ajuste (NaN) no se exige."""
        return math.isnan(self.homogeneidad) or self.homogeneidad < self.tolerancia_homogeneidad

    @property
    def pasa(self) -> bool:
        return self.residuo_maximo < self.tolerancia and self.homogenea

    def a_dict(self) -> dict:
        return {"model": self.tipo, "times": self.tiempos, "residuals": self.residuos,
                "max_residual": self.residuo_maximo, "tolerance": self.tolerancia,
                "time_homogeneity": self.homogeneidad, "time_homogeneous": self.homogenea,
                "time_homogeneity_tolerance": self.tolerancia_homogeneidad, "n_paths": self.n_caminos,
                "floor_events": self.eventos_piso, "negative_control": self.control,
                "initial_coefficients": self.coeficientes_iniciales, "passes": self.pasa}


def ejecutar_invariancia(tipo: str, beta: float, rho: float, a1: float = 0.03, a3: float = 0.01,
                         horizonte: float = 1.0, dt: float = 1e-3, n_caminos: int = 100,
                         semilla: int = 0, x_max: float = X_MAX_EXPERIMENTO,
                         epsilon: float = EPSILON_DEFECTO, malla: Optional[MallaMadurez] = None,
                         inicial: Optional[CurvaForward] = None,
                         trabajadores: int = 1) -> ReporteInvariancia:
    """Simula el HJM desde un punto de Sigma (o desde `inicial`, control negativo) y
    sigue el residuo de invariancia; tolerancia 5 (dt + paso_malla^2).

    tipo: 'vasicek' o 'cir'. La homogeneidad temporal es max_t |b(t) - b(0)| del
    ajuste de Hull-White sobre la curva inicial (paso <= 1e-3) y también decide `pasa`.
    """
    if tipo not in ("vasicek", "cir"):
        raise ErrorParametro(f"Tipo desconocido: {tipo}")
    if malla is None:
        malla = malla_experimento(x_max, horizonte, dt)
    sol = forma_cerrada_cir(beta, rho, malla) if tipo == "cir" else forma_cerrada_vasicek(beta, malla)
    if inicial is None:
        h0 = punto_singular(sol, tipo, rho, a1, a3)
    else:
        h0 = remuestrear(inicial, malla)
    cfg = ConfiguracionHJM(dt, horizonte, epsilon, semilla)
    if tipo == "cir":
        sigma = EstructuraVolatilidad.cir(rho, sol.B, epsilon)
    else:
        sigma = EstructuraVolatilidad.vasicek(rho, beta)
    tolerancia = 5.0 * (dt + malla.paso ** 2)
    tipo_sigma = "ho_lee" if sol.tipo == "ho_lee" else tipo
    inicio = descomposicion_singular(h0, sol, tipo_sigma, rho)
    n = cfg.n_pasos

    def camino(i: int):
        dW = ruido.incrementos(semilla, i, n, dt)
        h = h0
        residuos = [inicio.residuo_invariancia()]
        pisos = 0
        for k in range(n):
            h, truncado = paso_euler_mild(sigma, h, dW[k], cfg)
            pisos += int(truncado)
            residuos.append(descomposicion_singular(h, sol, tipo_sigma, rho).residuo_invariancia())
        return residuos, pisos

    resultados = ruido.mapear_caminos(camino, n_caminos, trabajadores)
    residuos = np.max(np.array([r[0] for r in resultados]), axis=0)

    homogeneidad = math.nan
    try:
        modelo = _ajustar("hwcir" if tipo == "cir" else "hwv", h0, beta, rho, horizonte,
                          min(dt, DT_HOMOGENEIDAD), epsilon)
        homogeneidad = float(np.max(np.abs(modelo.b_t - modelo.b_t[0])))
    except (ErrorParametro, ErrorDominio) as e:
        logger.warning("Sin ajuste de Hull-White para la homogeneidad temporal: %s", e)
    return ReporteInvariancia(tipo, np.linspace(0.0, horizonte, n + 1).tolist(), residuos.tolist(),
                              tolerancia, homogeneidad, n_caminos,
                              int(sum(r[1] for r in resultados)), inicial is not None,
                              inicio.coeficientes)
