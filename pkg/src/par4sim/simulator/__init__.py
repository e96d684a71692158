from .campaign import CampaignConfig, CampaignResult, run_campaign
from .personalization import run_personalization
from .workers import SimWorker, build_crowd, choose
from .worldgen import World, WorldSpec, generate_world

__all__ = [
    "CampaignConfig",
    "CampaignResult",
    "run_campaign",
    "run_personalization",
    "SimWorker",
    "build_crowd",
    "choose",
    "World",
    "WorldSpec",
    "generate_world",
]
