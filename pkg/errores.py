"""
Excepciones del paquete.

Todas heredan de ErrorHJM para que la línea de comandos pueda traducirlas
a códigos de salida sin conocer cada caso.
"""


class ErrorHJM(Exception):
    # Error base para todo lo relacionado con curvas y modelos
    pass


class ErrorParametro(ErrorHJM):
    """Parámetro fuera de rango (beta negativo, malla con menos de 3 nodos, ...)."""
    pass


class ErrorDominio(ErrorHJM):
    """La curva sale del conjunto abierto U, o un nodo cae fuera de la malla."""
    pass


class ErrorPadAgotado(ErrorDominio):
    """El desplazamiento pedido supera el pad restante de la curva."""
    pass


class ErrorCondicionamiento(ErrorHJM):
    """Base numéricamente dependiente, sonda degenerada o sistema singular."""
    pass


class ErrorRiccati(ErrorHJM):
    # La solución explota antes del final de la malla
    pass


class ErrorFormato(ErrorHJM):
    """Archivo CSV/JSON mal formado. Guarda el número de línea si se conoce."""

    def __init__(self, mensaje: str, linea: int = None):
        if linea is not None:
            mensaje = f"línea {linea}: {mensaje}"
        super().__init__(mensaje)
        self.linea = linea


class ErrorEspecificacion(ErrorHJM):
    # Especificación de volatilidad inválida o sin las derivadas necesarias
    pass


class ErrorConvergencia(ErrorHJM):
    """Ajuste no lineal sin convergencia; se informa con el mejor resultado obtenido."""
    pass
