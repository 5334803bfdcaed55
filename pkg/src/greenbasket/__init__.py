"""greenbasket: a food-footprint shopping assistant.

Subsystems: footprint scoring (``footprint``), consumer-behavior chain
model (``chain``), product catalog (``catalog``), shopping lists and
community feed (``listkeeper``), gamification engine (``gamify``), HTTP
gateway (``api``) and admin CLI (``cli``).
"""

__version__ = "0.1.0"
