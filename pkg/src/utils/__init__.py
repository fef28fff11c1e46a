# Initialisation du paquet 
