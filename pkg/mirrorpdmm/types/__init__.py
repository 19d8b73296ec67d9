from .arrays import FloatVector, array_to_list, to_float_array

__all__ = ["FloatVector", "array_to_list", "to_float_array"]
