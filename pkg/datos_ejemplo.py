"""
Script para generar archivos de ejemplo.
Escribe las 12 curvas de prueba y especificaciones de volatilidad en un
directorio, listos para `lie-check --curves` y `lie-check --vol`.
"""
import os
import sys
from typing import List

import configuracion
from espacio_curvas import MallaMadurez
from io_curvas import escribir_curva, escribir_json
from lie import curvas_prueba
from riccati import forma_cerrada_cir
from volatilidad import EstructuraVolatilidad, Expresion, FactorExpresion

BETA_EJEMPLO = 0.5
RHO_EJEMPLO = 0.02


def especificaciones(malla: MallaMadurez) -> dict:
    """Volatilidades de ejemplo: dos con realización afín y dos locales obstruidas."""
    direccion_cir = forma_cerrada_cir(BETA_EJEMPLO, RHO_EJEMPLO, malla).B
    obstruida = Expresion.exponencial(RHO_EJEMPLO, -BETA_EJEMPLO).por(
        Expresion((FactorExpresion("poly", "y", (1.0, 0.5)),)))
    cir_local = Expresion((FactorExpresion("const", "y", (RHO_EJEMPLO,)),
                           FactorExpresion("sqrt", "y", (0.0, 1.0))))
    return {
        "vasicek": EstructuraVolatilidad.vasicek(RHO_EJEMPLO, BETA_EJEMPLO).a_dict(),
        "cir": EstructuraVolatilidad.cir(RHO_EJEMPLO, direccion_cir, 1e-6).a_dict(),
        "local_obstruida": EstructuraVolatilidad.local(obstruida).a_dict(),
        "local_cir": EstructuraVolatilidad.local(cir_local, 1e-6).a_dict(),
    }


def poblar_ejemplo(directorio: str, malla: MallaMadurez = MallaMadurez()) -> List[str]:
    rutas = []
    for i, h in enumerate(curvas_prueba(malla, BETA_EJEMPLO, RHO_EJEMPLO), start=1):
        ruta = os.path.join(directorio, "curvas", f"curva_{i:02d}.csv")
        escribir_curva(h, ruta)
        rutas.append(ruta)
    print(f"✅ {len(rutas)} curvas de prueba en {os.path.join(directorio, 'curvas')}")

    for nombre, datos in especificaciones(malla).items():
        ruta = os.path.join(directorio, f"vol_{nombre}.json")
        escribir_json(datos, ruta)
        rutas.append(ruta)
        print(f"  - {ruta}")
    escribir_json({"grid": malla.a_dict()}, os.path.join(directorio, "config.json"))
    print("\n📋 Ejemplo de uso:")
    print(f"  python main.py lie-check --vol {os.path.join(directorio, 'vol_vasicek.json')} "
          f"--curves {os.path.join(directorio, 'curvas')}")
    return rutas


if __name__ == "__main__":
    poblar_ejemplo(sys.argv[1] if len(sys.argv) > 1 else configuracion.dir_salida())
