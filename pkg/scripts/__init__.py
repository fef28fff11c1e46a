# Scripts d'expérience en ligne de commande
