#!/usr/bin/env python3
"""Bolus advisor arithmetic: meal component, correction, insulin-on-board.

Prints a dose table over a carbohydrate and glucose grid, then shows how a
recent injection shrinks the next recommendation as it decays.
"""
from glucoplan.bolus import insulin_on_board, recommend
from glucoplan.domain import PatientSettings

settings = PatientSettings()
print(f"settings: ICR {settings.ICR} g/U, ISF {settings.ISF} mmol/L/U, "
      f"target {settings.G_target} mmol/L, DIA {settings.DIA:.0f} min\n")

glucose_grid = [4.0, 6.5, 9.0, 12.5]
carb_grid = [0, 20, 40, 60, 80]

header = "carbs\\G " + "".join(f"{g:>8.1f}" for g in glucose_grid)
print(header)
for carbs in carb_grid:
    row = f"{carbs:>6} g"
    for glucose in glucose_grid:
        row += f"{recommend(carbs, glucose, settings).total:>8.1f}"
    print(row)

print("\ninsulin-on-board after a 4 U bolus (linear decay over DIA):")
for age in (0, 60, 120, 180, 240):
    iob = insulin_on_board([(4.0, float(age))], settings.DIA)
    print(f"  {age:>3} min  ->  {iob:.2f} U still active")

print("\nrecommendation for 60 g at 12.5 mmol/L with 1.5 U on board:")
breakdown = recommend(60.0, 12.5, settings, [(3.0, 120.0)])
print(f"  meal {breakdown.meal_component:.2f} U"
      f" + correction {breakdown.correction_component:.2f} U"
      f" - IOB {breakdown.iob_deduction:.2f} U"
      f" = {breakdown.total} U (rounded to the 0.5 U pen step)")
