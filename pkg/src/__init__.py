# src package