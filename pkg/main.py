"""
Punto de entrada de la línea de comandos.

Cada subcomando imprime un veredicto JSON en la salida estándar y un resumen
legible en la salida de errores. Códigos de salida: 0 si pasa, 1 si falla alguna
tolerancia, 2 si hay un error de uso o de formato.
"""
import argparse
import logging
import math
import sys
from typing import List, Optional

import numpy as np

import configuracion
from errores import ErrorEspecificacion, ErrorFormato, ErrorHJM, ErrorParametro, ErrorRiccati
from espacio_curvas import CurvaForward, FuncionalLineal, rango_a3
from experimentos import (PASOS_DEFECTO, TOL_BRECHA, X_MAX_EXPERIMENTO, ejecutar_equivalencia,
                          ejecutar_invariancia)
from hjm import ConfiguracionHJM, PasoFrechet
from io_curvas import a_json, escribir_json, escribir_tabla, leer_curva, leer_directorio_curvas, leer_json
from lie import chequeo_involutividad, curvas_prueba
from modelos_afines import (ESQUEMAS_HWV, ajuste_hwcir, ajuste_hwv, descomposicion_singular,
                            realizacion_desde_dict, residuo_b_c, simular_realizacion)
from riccati import (ParametrosRiccati, forma_cerrada_cir, forma_cerrada_vasicek, residuo,
                     resolver_riccati, verificar_independencia)
from svensson import (TENORES_DEFECTO, EstadoSvenssonConsistente, chequeo_corchete_svensson,
                      construir_ell, curvas_corchete_svensson, residuo_base, simular_svensson,
                      svensson_ajustar)
from volatilidad import EstructuraVolatilidad

logger = logging.getLogger(__name__)

TOL_FORMA_CERRADA = 1e-6
TOL_VOLTERRA = 1e-4
TOL_SPAN_SVENSSON = 1e-10
CURVA_PLANA_DEFECTO = 0.03


def _requerido(config: dict, clave: str):
    if config.get(clave) is None:
        raise ErrorParametro(f"Falta el parámetro '{clave}' (flag o archivo de configuración)")
    return config[clave]


def _resumen(*lineas: str):
    for linea in lineas:
        print(linea, file=sys.stderr)


def _marca(pasa: bool) -> str:
    return "✅ pasa" if pasa else "❌ falla"


def _leer_curva(config: dict, ruta: str) -> CurvaForward:
    return leer_curva(ruta, pad=float(config["pad"]))


# ------------------ Riccati ------------------
def cmd_riccati(config: dict) -> dict:
    malla = configuracion.malla_desde_config(config)
    a, b = float(_requerido(config, "a")), float(_requerido(config, "b"))
    p = ParametrosRiccati(a, b, float(config.get("lambda0", 1.0)))
    try:
        sol = resolver_riccati(p, malla)
    except ErrorRiccati as e:
        _resumen(f"Riccati: {e}")
        return {"command": "riccati-solve", "blow_up": str(e), "passes": False}

    error_cerrada = None
    if p.lambda0 == 1.0 and b >= 0 and a >= 0:
        cerrada = forma_cerrada_vasicek(b, malla) if a == 0 else forma_cerrada_cir(b, math.sqrt(a), malla)
        error_cerrada = (sol.Lambda - cerrada.Lambda).sup()
    independientes = verificar_independencia(sol)
    ruta = configuracion.ruta_salida(config.get("out"), "riccati.csv")
    escribir_tabla(ruta, {"x": malla.nodos, "Lambda": sol.Lambda.valores, "B": sol.B.valores})

    pasa = independientes and (error_cerrada is None or error_cerrada < TOL_FORMA_CERRADA)
    _resumen(f"Riccati {sol.tipo} (a={a}, b={b}) en {malla.n_puntos} nodos -> {ruta}",
             f"  error frente a la forma cerrada: {error_cerrada}",
             f"  {_marca(pasa)}")
    return {"command": "riccati-solve", "kind": sol.tipo, "grid": malla.a_dict(), "csv": ruta,
            "residual": residuo(sol), "closed_form_error": error_cerrada,
            "tolerance": TOL_FORMA_CERRADA, "independent": independientes, "passes": pasa}


# ------------------ Modelos afines ------------------
def _tipo_sigma(modelo: str, beta: float) -> str:
    if modelo == "hwcir":
        return "cir"
    return "ho_lee" if beta == 0 else "vasicek"


def cmd_calibrar(config: dict) -> dict:
    modelo = _requerido(config, "model")
    r_estrella = _leer_curva(config, _requerido(config, "curve"))
    beta, rho = float(_requerido(config, "beta")), float(_requerido(config, "rho"))
    horizonte, dt = float(config["horizon"]), float(config["dt"])
    if modelo == "hwv":
        realizacion = ajuste_hwv(r_estrella, beta, rho, horizonte, dt)
    elif modelo == "hwcir":
        realizacion = ajuste_hwcir(r_estrella, beta, rho, horizonte, dt, float(config["epsilon"]))
    else:
        raise ErrorParametro(f"Modelo desconocido: {modelo}")

    membresia = descomposicion_singular(r_estrella, realizacion.riccati, _tipo_sigma(modelo, beta), rho)
    artefacto = realizacion.a_dict()
    artefacto["sigma_membership"] = membresia.a_dict()
    pasa = bool(np.all(np.isfinite(realizacion.b_t)))
    if modelo == "hwcir":
        brecha = float(np.max(np.abs(realizacion.c_t - realizacion.c_volterra)))
        artefacto["volterra_gap"] = brecha
        artefacto["b_c_residual"] = residuo_b_c(realizacion)
        pasa = pasa and brecha < TOL_VOLTERRA
    artefacto["passes"] = pasa
    ruta = configuracion.ruta_salida(config.get("out"), f"modelo_{modelo}.json")
    escribir_json(artefacto, ruta)

    _resumen(f"Ajuste {modelo}: beta={beta}, rho={rho}, horizonte={horizonte}, dt={dt} -> {ruta}",
             f"  b(0) = {realizacion.b_t[0]:.6g}, b(T) = {realizacion.b_t[-1]:.6g}",
             f"  r* en Sigma: {membresia.es_miembro}",
             f"  {_marca(pasa)}")
    return {"command": "calibrate", "model": modelo, "artifact": ruta,
            "in_sigma": membresia.es_miembro, "passes": pasa}


def cmd_simular(config: dict) -> dict:
    realizacion = realizacion_desde_dict(leer_json(_requerido(config, "model")))
    cfg = ConfiguracionHJM(float(config["dt"]), float(config["horizon"]), float(config["epsilon"]),
                           int(config["seed"]))
    n_caminos = int(config["paths"])
    vencimientos = [float(v) for v in config.get("maturities") or (1.0, 2.0, 5.0)]
    ensamble = simular_realizacion(realizacion, cfg, n_caminos, config.get("scheme") or "exacta",
                                   vencimientos, trabajadores=int(config["workers"]))

    columnas = {"t": ensamble.tiempos,
                "mean_short_rate": ensamble.tasas_cortas.mean(axis=0),
                "mean_Z": ensamble.factores.mean(axis=0),
                "var_Z": ensamble.factores.var(axis=0, ddof=1) if n_caminos > 1
                else np.zeros_like(ensamble.tiempos)}
    for j, T in enumerate(vencimientos):
        columnas[f"mean_P_{T:g}"] = ensamble.precios[:, :, j].mean(axis=0)
    ruta = configuracion.ruta_salida(config.get("out"), f"simulacion_{realizacion.tipo}.csv")
    escribir_tabla(ruta, columnas)
    if config.get("dump"):
        por_camino = {"t": ensamble.tiempos}
        por_camino.update({f"path_{i}": ensamble.factores[i] for i in range(n_caminos)})
        escribir_tabla(config["dump"], por_camino)

    # E[Z_T] = 0 en ambos modelos
    final = ensamble.factores[:, -1]
    cota = 4.0 * math.sqrt(final.var(ddof=1) / n_caminos) + 1e-12 if n_caminos > 1 else math.inf
    pasa = abs(float(final.mean())) <= cota
    resumen = ensamble.resumen()
    _resumen(f"Simulación {realizacion.tipo}: {n_caminos} caminos, dt={cfg.paso_tiempo} -> {ruta}",
             f"  Z_T medio = {final.mean():.4g} (cota {cota:.3g}), caminos sin piso: "
             f"{resumen['floor_free_fraction']:.1%}",
             f"  {_marca(pasa)}")
    return {"command": "simulate", "model": realizacion.tipo, "csv": ruta,
            "Z_final_mean": resumen["Z_final_mean"], "Z_final_var": resumen["Z_final_var"],
            "mean_bound": cota, "floor_events": resumen["floor_events"],
            "floor_free_fraction": resumen["floor_free_fraction"], "passes": pasa}


def cmd_singular(config: dict) -> dict:
    tipo = _requerido(config, "kind")
    beta, rho = float(_requerido(config, "beta")), float(_requerido(config, "rho"))
    h = _leer_curva(config, _requerido(config, "curve"))
    if tipo == "cir":
        sol = forma_cerrada_cir(beta, rho, h.malla)
    elif tipo == "vasicek":
        sol = forma_cerrada_vasicek(beta, h.malla)
    else:
        raise ErrorParametro(f"Tipo desconocido: {tipo}")
    tol = config.get("tol")
    d = descomposicion_singular(h, sol, sol.tipo, rho, None if tol is None else float(tol))
    a1, a2, a3 = d.coeficientes
    _resumen(f"Descomposición {sol.tipo}: a1={a1:.6g}, a2={a2:.6g}, a3={a3:.6g}",
             f"  residuo {d.residuo:.3g}, restricción {d.defecto_restriccion:.3g}, tolerancia {d.tolerancia:.3g}",
             f"  {_marca(d.es_miembro)}")
    verdict = d.a_dict()
    verdict.update({"command": "check-singular", "kind": sol.tipo, "passes": d.es_miembro})
    return verdict


# ------------------ Corchetes de Lie ------------------
def cmd_lie(config: dict) -> dict:
    malla = configuracion.malla_desde_config(config)
    directorio = config.get("curves")
    alpha = config.get("svensson_alpha")
    if alpha is not None:
        alpha = float(alpha)
        tenores = config.get("tenors") or TENORES_DEFECTO
        curvas = (leer_directorio_curvas(directorio, malla) if directorio
                  else curvas_corchete_svensson(malla, alpha, tenores))
        chequeo = chequeo_corchete_svensson(alpha, construir_ell(alpha, tenores, malla), curvas,
                                            PasoFrechet(float(config["eps_fd"])))
        _resumen(f"Svensson alpha={alpha}: {len(curvas)} curvas, umbral {chequeo.umbral:.3g}",
                 f"  residuo máximo {max(r.residuo_rel for r in chequeo.reportes):.3g}, "
                 f"discrepancia máxima del coeficiente {max(chequeo.discrepancias):.3g}",
                 f"  {_marca(chequeo.pasa)}")
        verdict = chequeo.a_dict()
        verdict.update({"command": "lie-check", "volatility": "svensson", "passes": chequeo.pasa})
        return verdict

    sigma = EstructuraVolatilidad.desde_dict(leer_json(_requerido(config, "vol")), malla)
    curvas = leer_directorio_curvas(directorio, malla) if directorio else curvas_prueba(malla)
    reporte = chequeo_involutividad(sigma, curvas, PasoFrechet(float(config["eps_fd"])))
    _resumen(f"Involutividad con d={sigma.d}: {len(reporte.residuos)} curvas evaluadas, "
             f"{len(reporte.omitidas)} omitidas",
             f"  residuo máximo {reporte.residuo_maximo:.3g}, umbral {reporte.umbral:.3g}")
    if reporte.escaneo_local is not None:
        _resumen(f"  volatilidad local obstruida: {reporte.escaneo_local.obstruido}")
    _resumen(f"  {_marca(reporte.pasa)}")
    verdict = reporte.a_dict()
    verdict["command"] = "lie-check"
    return verdict


# ------------------ Svensson ------------------
def cmd_svensson_ajuste(config: dict) -> dict:
    h = _leer_curva(config, _requerido(config, "curve"))
    resultado = svensson_ajustar(h)
    verdict = resultado.a_dict()
    ruta = config.get("out")
    if ruta:
        escribir_json(verdict, ruta)
    z = ", ".join(f"{v:.6g}" for v in resultado.punto.como_tupla())
    _resumen(f"Svensson: z = ({z})",
             f"  desajuste sup {resultado.desajuste_sup:.3g}, rms {resultado.desajuste_rms:.3g}",
             f"  identificable: {resultado.identificable}",
             f"  {_marca(resultado.convergio)}")
    verdict.update({"command": "svensson-fit", "passes": resultado.convergio})
    return verdict


def _indices_instantaneas(n: int, cuantas: int = 5) -> List[int]:
    return sorted(set(int(round(k)) for k in np.linspace(0, n, cuantas)))


def cmd_svensson_sim(config: dict) -> dict:
    alpha = float(_requerido(config, "alpha"))
    z0 = [float(v) for v in _requerido(config, "z0")]
    if len(z0) != 4:
        raise ErrorParametro(f"--z0 necesita 4 valores, recibidos {len(z0)}")
    malla = configuracion.malla_desde_config(config)
    n_caminos = int(config["paths"])
    trayectorias = simular_svensson(EstadoSvenssonConsistente(alpha, *z0), float(config["dt"]),
                                    float(config["horizon"]), n_caminos, int(config["seed"]),
                                    int(config["workers"]))
    n = len(trayectorias.tiempos) - 1
    filas = {"path": [], "t": [], "Z1": [], "Z2": [], "Z3": [], "Z4": []}
    for i in range(n_caminos):
        filas["path"].extend([i] * (n + 1))
        filas["t"].extend(trayectorias.tiempos)
        for j in range(4):
            filas[f"Z{j + 1}"].extend(trayectorias.factores[i, :, j])
    ruta = configuracion.ruta_salida(config.get("out"), "svensson_factores.csv")
    escribir_tabla(ruta, filas)

    indices = _indices_instantaneas(n)
    residuo = max(residuo_base(trayectorias.estado(i, k).curva(malla), alpha)
                  for i in range(n_caminos) for k in indices)
    instantaneas = {"x": malla.nodos}
    for k in indices:
        instantaneas[f"t_{trayectorias.tiempos[k]:g}"] = trayectorias.estado(0, k).curva(malla).valores
    ruta_curvas = configuracion.ruta_salida(config.get("snapshots"), "svensson_curvas.csv")
    escribir_tabla(ruta_curvas, instantaneas)

    pasa = residuo < TOL_SPAN_SVENSSON
    _resumen(f"Svensson consistente alpha={alpha}: {n_caminos} caminos, {n} pasos -> {ruta}",
             f"  residuo frente a span(g1..g4): {residuo:.3g}",
             f"  {_marca(pasa)}")
    return {"command": "svensson-sim", "alpha": alpha, "csv": ruta, "snapshots": ruta_curvas,
            "span_residual": residuo, "tolerance": TOL_SPAN_SVENSSON, "passes": pasa}


# ------------------ Experimentos ------------------
def cmd_equivalencia(config: dict) -> dict:
    modelo = _requerido(config, "model")
    beta, rho = float(_requerido(config, "beta")), float(_requerido(config, "rho"))
    if config.get("curve"):
        r_estrella = _leer_curva(config, config["curve"])
    else:
        r_estrella = CurvaForward.constante(configuracion.malla_desde_config(config), CURVA_PLANA_DEFECTO)
    reporte = ejecutar_equivalencia(
        modelo, r_estrella, beta, rho, config.get("dts") or PASOS_DEFECTO, int(config["paths"]),
        int(config["seed"]), float(config["horizon"]), float(config["epsilon"]),
        float(config.get("x_max_experiment") or X_MAX_EXPERIMENTO),
        float(config.get("tol") or TOL_BRECHA), int(config["workers"]))
    _resumen(f"Equivalencia {modelo}: {reporte.n_caminos} caminos")
    for dt, media, maxima in zip(reporte.pasos, reporte.brechas_medias, reporte.brechas_maximas):
        _resumen(f"  dt={dt:g}: brecha media {media:.3g}, máxima {maxima:.3g}")
    _resumen(f"  orden ajustado: {reporte.orden}", f"  {_marca(reporte.pasa)}")
    verdict = reporte.a_dict()
    verdict["command"] = "equivalence"
    return verdict


def cmd_invariancia(config: dict) -> dict:
    tipo = _requerido(config, "kind")
    beta, rho = float(_requerido(config, "beta")), float(_requerido(config, "rho"))
    a1 = float(config.get("a1", 0.03))
    inicial = None
    if config.get("off_sigma"):
        inicial = CurvaForward.constante(configuracion.malla_desde_config(config), a1)
    reporte = ejecutar_invariancia(tipo, beta, rho, a1, float(config.get("a3", 0.01)),
                                   float(config["horizon"]), float(config["dt"]), int(config["paths"]),
                                   int(config["seed"]), float(config.get("x_max_experiment") or X_MAX_EXPERIMENTO),
                                   float(config["epsilon"]), inicial=inicial,
                                   trabajadores=int(config["workers"]))
    verdict = reporte.a_dict()
    dentro = reporte.residuo_maximo < reporte.tolerancia
    verdict["residual_within_tolerance"] = dentro
    # En el control negativo lo esperado es salir de la tolerancia
    verdict["passes"] = (not dentro) if reporte.control else reporte.pasa
    verdict["command"] = "invariance"
    _resumen(f"Invariancia {tipo}{' (control fuera de Sigma)' if reporte.control else ''}: "
             f"{reporte.n_caminos} caminos",
             f"  residuo máximo {reporte.residuo_maximo:.3g}, tolerancia {reporte.tolerancia:.3g}",
             f"  homogeneidad temporal de b: {reporte.homogeneidad:.3g} ({_marca(reporte.homogenea)})",
             f"  {_marca(verdict['passes'])}")
    return verdict


def cmd_rango(config: dict) -> dict:
    funcionales = [FuncionalLineal.puntual(x) for x in config.get("forwards") or ()]
    funcionales += [FuncionalLineal.rendimiento(x) for x in config.get("yields") or ()]
    if config.get("functionals"):
        datos = leer_json(config["functionals"])
        if not isinstance(datos, list):
            raise ErrorFormato(f"{config['functionals']}: se esperaba una lista de funcionales")
        funcionales += [FuncionalLineal.desde_dict(d) for d in datos]
    q = int(_requerido(config, "q"))
    dim = config.get("basis_dim")
    informe = rango_a3(funcionales, q, None if dim is None else int(dim),
                       configuracion.malla_desde_config(config))
    _resumen(f"(A3): rango {informe.rango} de {informe.objetivo} con {len(funcionales)} funcionales, q={q}",
             f"  {_marca(informe.completo)}")
    verdict = informe.a_dict()
    verdict.update({"command": "rank-a3", "passes": informe.completo})
    return verdict


COMANDOS = {
    "riccati-solve": cmd_riccati,
    "calibrate": cmd_calibrar,
    "simulate": cmd_simular,
    "check-singular": cmd_singular,
    "lie-check": cmd_lie,
    "svensson-fit": cmd_svensson_ajuste,
    "svensson-sim": cmd_svensson_sim,
    "equivalence": cmd_equivalencia,
    "invariance": cmd_invariancia,
    "rank-a3": cmd_rango,
}


# ------------------ Argumentos ------------------
def _parser() -> argparse.ArgumentParser:
    comunes = argparse.ArgumentParser(add_help=False)
    comunes.add_argument("--config", help="Archivo JSON de configuración (los flags tienen prioridad)")
    comunes.add_argument("--report", help="Escribe también el veredicto JSON en este archivo")
    comunes.add_argument("--verbose", action="store_true", help="Registro a nivel INFO")
    comunes.add_argument("--x-max", type=float)
    comunes.add_argument("--pad", type=float)
    comunes.add_argument("--n-points", type=int)
    comunes.add_argument("--eps-fd", type=float, help="Paso relativo de las diferencias de Fréchet")
    comunes.add_argument("--epsilon", type=float, help="Piso del dominio U")
    comunes.add_argument("--seed", type=int)
    comunes.add_argument("--workers", type=int, help="Hilos para evaluar caminos")

    simulacion = argparse.ArgumentParser(add_help=False)
    simulacion.add_argument("--dt", type=float)
    simulacion.add_argument("--horizon", type=float)
    simulacion.add_argument("--paths", type=int)

    parser = argparse.ArgumentParser(prog="hjm-fdr",
                                     description="Realizaciones de dimensión finita de modelos HJM")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("riccati-solve", parents=[comunes], help="Resuelve la ecuación de Riccati en la malla")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--lambda0", type=float)
    p.add_argument("--out", help="CSV con columnas x, Lambda, B")

    p = sub.add_parser("calibrate", parents=[comunes, simulacion], help="Ajusta hwv o hwcir a una curva")
    p.add_argument("--model", choices=("hwv", "hwcir"))
    p.add_argument("--curve")
    p.add_argument("--beta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--out", help="Artefacto JSON del modelo")

    p = sub.add_parser("simulate", parents=[comunes, simulacion], help="Simula una realización calibrada")
    p.add_argument("--model", help="Artefacto JSON producido por calibrate")
    p.add_argument("--scheme", choices=ESQUEMAS_HWV)
    p.add_argument("--maturities", type=float, nargs="+")
    p.add_argument("--out", help="CSV resumen del ensamble")
    p.add_argument("--dump", help="CSV con Z por camino")

    p = sub.add_parser("check-singular", parents=[comunes], help="Pertenencia de una curva a Sigma")
    p.add_argument("--curve")
    p.add_argument("--kind", choices=("vasicek", "cir"))
    p.add_argument("--beta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("lie-check", parents=[comunes], help="Corchetes de Lie sobre curvas de prueba")
    fuente = p.add_mutually_exclusive_group()
    fuente.add_argument("--vol", help="Especificación JSON de la volatilidad")
    fuente.add_argument("--svensson-alpha", type=float)
    p.add_argument("--tenors", type=float, nargs=4)
    p.add_argument("--curves", help="Directorio con curvas CSV (por defecto las 12 estándar)")

    p = sub.add_parser("svensson-fit", parents=[comunes], help="Ajusta la familia de Svensson")
    p.add_argument("--curve")
    p.add_argument("--out")

    p = sub.add_parser("svensson-sim", parents=[comunes, simulacion], help="Dinámica consistente de Svensson")
    p.add_argument("--alpha", type=float)
    p.add_argument("--z0", type=float, nargs=4)
    p.add_argument("--out", help="CSV de factores por camino")
    p.add_argument("--snapshots", help="CSV de curvas del camino 0")

    p = sub.add_parser("equivalence", parents=[comunes, simulacion], help="HJM completo frente a la realización")
    p.add_argument("--model", choices=("hwv", "hwcir"))
    p.add_argument("--curve")
    p.add_argument("--beta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--dts", type=float, nargs="+")
    p.add_argument("--x-max-experiment", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("invariance", parents=[comunes, simulacion], help="Invariancia local de Sigma")
    p.add_argument("--kind", choices=("vasicek", "cir"))
    p.add_argument("--beta", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--a1", type=float)
    p.add_argument("--a3", type=float)
    p.add_argument("--off-sigma", action="store_true", default=None,
                   help="Control negativo: parte de la curva plana a1")
    p.add_argument("--x-max-experiment", type=float)

    p = sub.add_parser("rank-a3", parents=[comunes], help="Rango de (l, l o A, ..., l o A^q)")
    p.add_argument("--forwards", type=float, nargs="+", help="Nodos de forwards de referencia")
    p.add_argument("--yields", type=float, nargs="+", help="Nodos de rendimientos de referencia")
    p.add_argument("--functionals", help="Lista JSON de funcionales")
    p.add_argument("--q", type=int)
    p.add_argument("--basis-dim", type=int, help="Número de curvas de la base de prueba")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "report", "verbose")}
    try:
        config = configuracion.combinar(flags, args.config)
        verdict = COMANDOS[args.command](config)
        codigo = 0 if verdict.get("passes") else 1
    except (ErrorFormato, ErrorEspecificacion, ErrorParametro) as e:
        verdict = {"command": args.command, "error": str(e), "passes": False}
        codigo = 2
    except ErrorHJM as e:
        verdict = {"command": args.command, "error": str(e), "passes": False}
        codigo = 1
    if codigo and "error" in verdict:
        _resumen(f"Error: {verdict['error']}")
    if args.report:
        escribir_json(verdict, args.report)
    print(a_json(verdict))
    return codigo


if __name__ == "__main__":
    sys.exit(main())
