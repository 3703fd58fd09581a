"""First-order radio energy model.

Transmitting ``k`` bits over ``d`` meters costs ``E_elec*k + eps_amp*k*d**2``;
receiving costs ``E_elec*k``. One forwarding hop is a full ADV/REQ/DATA
exchange, so both ends transmit and receive.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import SimConfig

PATH_LOSS_EXPONENT = 2


@dataclass(frozen=True)
class RadioModel:
    e_elec_j_per_bit: float = 50e-9
    eps_amp_j_per_bit_m2: float = 100e-12

    def __post_init__(self):
        if not (self.e_elec_j_per_bit > 0 and self.eps_amp_j_per_bit_m2 > 0):
            raise ValueError("radio constants must be > 0")

    @property
    def path_loss_exponent(self) -> int:
        return PATH_LOSS_EXPONENT

    @classmethod
    def from_config(cls, config: SimConfig) -> RadioModel:
        return cls(config.e_elec_j_per_bit, config.eps_amp_j_per_bit_m2)


def tx_cost(bits: int, d: float, model: RadioModel) -> float:
    if bits <= 0:
        raise ValueError(f"bits must be > 0, got {bits}")
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    return model.e_elec_j_per_bit * bits + model.eps_amp_j_per_bit_m2 * bits * d * d


def rx_cost(bits: int, model: RadioModel) -> float:
    if bits <= 0:
        raise ValueError(f"bits must be > 0, got {bits}")
    return model.e_elec_j_per_bit * bits


def hop_transaction_cost(d: float, config: SimConfig, model: RadioModel) -> tuple[float, float]:
    """Return ``(sender_j, receiver_j)`` for one ADV/REQ/DATA exchange over ``d`` meters.

    sender:   tx ADV, rx REQ, tx DATA
    receiver: rx ADV, tx REQ, rx DATA
    """
    ctrl = config.control_packet_bits
    data = config.data_packet_bits
    sender_j = tx_cost(ctrl, d, model) + rx_cost(ctrl, model) + tx_cost(data, d, model)
    receiver_j = rx_cost(ctrl, model) + tx_cost(ctrl, d, model) + rx_cost(data, model)
    return sender_j, receiver_j


def adv_leg_cost(d: float, config: SimConfig, model: RadioModel) -> tuple[float, float]:
    """Costs when the receiver already holds the data: only the ADV goes out."""
    ctrl = config.control_packet_bits
    return tx_cost(ctrl, d, model), rx_cost(ctrl, model)


def hop_latency_s(config: SimConfig) -> float:
    return (2 * config.control_packet_bits + config.data_packet_bits) / config.data_rate_bps
